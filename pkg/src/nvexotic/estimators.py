"""scikit-learn compatible front ends for the phase fit and the coupling bound."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .inference import PhaseEstimate, Setup, exclusion_curve, fit_phase, measured_parameters


def _phase_column(X):
    X = np.asarray(X, dtype=float)
    return X.reshape(-1, 1) if X.ndim == 1 else X


class PhaseFitter(RegressorMixin, BaseEstimator):
    """Fit the echo contrast ``I = -sin(phi_mw) sin(phi)``.

    ``X`` holds the microwave phase in its single column and ``y`` the
    measured ``I``. Per-point errors go in ``sigma``; ``sample_weight`` is
    accepted as inverse variances in the usual scikit-learn way.

    Attributes
    ----------
    phi_ : float
        Fitted anomalous phase (rad).
    sigma_phi_ : float
        Its 1-sigma statistical error.
    """

    def fit(self, X, y, sigma=None, sample_weight=None):
        X, y = check_X_y(_phase_column(X), y, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("X must have a single column of microwave phases")
        if sigma is not None and sample_weight is not None:
            raise ValueError("pass sigma or sample_weight, not both")
        if sample_weight is not None:
            sigma = np.asarray(sample_weight, dtype=float) ** -0.5
        sigma = np.ones_like(y) if sigma is None else np.broadcast_to(np.asarray(sigma, dtype=float), y.shape)
        est = fit_phase(np.column_stack([X[:, 0], y, sigma]))
        self.phi_ = est.phi_central
        self.sigma_phi_ = est.sigma_stat
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "phi_")
        X = check_array(_phase_column(X))
        return -np.sin(X[:, 0]) * np.sin(self.phi_)

    @property
    def estimate_(self):
        check_is_fitted(self, "phi_")
        return PhaseEstimate(self.phi_, self.sigma_phi_)


class CouplingLimitEstimator(BaseEstimator):
    """Turn interference data into coupling upper limits versus force range.

    ``fit`` takes the same ``(X, y, sigma)`` as :class:`PhaseFitter`;
    ``predict`` maps force ranges (m) to bounds on ``|g_A^e g_V^N|``.

    Parameters
    ----------
    setup : Setup, optional
        Nominal experiment. Defaults to the published configuration.
    cl : float
        Confidence level of the bound.
    systematics : dict, optional
        Keyword overrides for :func:`measured_parameters`.
    reference : {'limit', 'central'}
        Coupling against which systematic shifts are evaluated.
    n_jobs : int
        Worker processes for sweeps over force range.
    """

    def __init__(self, setup=None, cl=0.95, systematics=None, reference="limit", n_jobs=1):
        self.setup = setup
        self.cl = cl
        self.systematics = systematics
        self.reference = reference
        self.n_jobs = n_jobs

    def fit(self, X, y, sigma=None):
        fitter = PhaseFitter().fit(X, y, sigma=sigma)
        self.estimate_ = fitter.estimate_
        self.n_features_in_ = 1
        return self

    def _setup(self):
        return Setup() if self.setup is None else self.setup

    def exclusion_curve(self, force_ranges):
        check_is_fitted(self, "estimate_")
        setup = self._setup()
        params = measured_parameters(setup, **(self.systematics or {}))
        return exclusion_curve(force_ranges, self.estimate_, setup, params, self.cl, self.reference, self.n_jobs)

    def predict(self, force_ranges):
        force_ranges = np.asarray(force_ranges, dtype=float).ravel()
        return np.array([p.g_limit for p in self.exclusion_curve(force_ranges)])
