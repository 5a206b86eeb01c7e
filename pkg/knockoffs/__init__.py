"""Knockoff construction package: moment estimation and Gaussian sampling."""

from knockoffs.moments import MomentEstimate, estimate_moments, shrink_to_diagonal, standardize
from knockoffs.gaussian import KnockoffSample, joint_gram, sample_knockoffs, solve_s_equi

__all__ = ['MomentEstimate', 'estimate_moments', 'shrink_to_diagonal', 'standardize',
           'KnockoffSample', 'joint_gram', 'sample_knockoffs', 'solve_s_equi']
