"""Model fits used by the selection pipeline: LASSO path, random forest, Huber."""

from learners.lasso import LassoPath, kkt_violation, lasso_path
from learners.forest import ForestModel, ForestSettings, fit_forest
from learners.robust import RobustFit, huber_fit

__all__ = ['LassoPath', 'kkt_violation', 'lasso_path',
           'ForestModel', 'ForestSettings', 'fit_forest',
           'RobustFit', 'huber_fit']
