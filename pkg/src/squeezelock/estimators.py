"""scikit-learn style front ends.

These wrap the functional core so the spectral estimator, the dark-noise
correction and the calibrated squeezing source can sit in a
``sklearn.pipeline.Pipeline`` and be cloned or grid-searched.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .detection import subtract_dark_noise
from .opo import OpoParams, calibrate_pump, spectrum_variances
from .spectra import SpectrumWindow, estimate_psd


class WelchPSD(TransformerMixin, BaseEstimator):
    """Averaged periodogram of each row of ``X``.

    Parameters
    ----------
    window : SpectrumWindow
        Span, RBW and number of averages.
    sample_rate : float, optional
        Defaults to the window's own rate (about four times ``f_stop``).
    averaging : {"power", "rms"}
    """

    def __init__(self, window=None, sample_rate=None, averaging="power"):
        self.window = window
        self.sample_rate = sample_rate
        self.averaging = averaging

    def _window(self):
        if self.window is None:
            raise ValueError("WelchPSD needs a SpectrumWindow")
        if not isinstance(self.window, SpectrumWindow):
            return SpectrumWindow(*self.window)
        return self.window

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        w = self._window()
        spec = estimate_psd(X[0], w, self.sample_rate, self.averaging)
        self.freqs_ = spec.freqs
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "freqs_")
        X = check_array(X, ensure_2d=True)
        w = self._window()
        return np.vstack([estimate_psd(row, w, self.sample_rate, self.averaging).power for row in X])


class DarkNoiseSubtractor(TransformerMixin, BaseEstimator):
    """Learns the electronic-noise spectrum from dark records, then subtracts it."""

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        self.dark_ = X.mean(axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "dark_")
        X = check_array(X, ensure_2d=True)
        return np.atleast_2d(subtract_dark_noise(X, self.dark_))


class SqueezedLightSource(BaseEstimator):
    """OPO whose pump is calibrated to a target squeezing level at the detector.

    ``fit`` solves for the pump parameter; ``predict`` returns the squeezed
    variance (shot-noise units, after ``detection_efficiency``) at each
    frequency in ``X``.
    """

    def __init__(self, target_db=-4.0, eta_esc=0.95, detection_efficiency=1.0, gamma=13.5e6):
        self.target_db = target_db
        self.eta_esc = eta_esc
        self.detection_efficiency = detection_efficiency
        self.gamma = gamma

    def fit(self, X=None, y=None):
        self.x_ = calibrate_pump(self.target_db, self.eta_esc * self.detection_efficiency)
        self.params_ = OpoParams(x=self.x_, gamma=self.gamma, eta_esc=self.eta_esc)
        return self

    def predict(self, X):
        check_is_fitted(self, "x_")
        f = np.ravel(np.asarray(X, dtype=float))
        v_sq, _ = spectrum_variances(self.x_, self.eta_esc * self.detection_efficiency, f, self.gamma)
        return v_sq

    def predict_db(self, X):
        return 10 * np.log10(self.predict(X))
