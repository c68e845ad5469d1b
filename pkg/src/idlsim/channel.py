"""Fading channels, CSI error, hardware distortion, effective-noise covariance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

C_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class ChannelSpec:
    nt: int
    nr: int
    model: str = "iid-rayleigh"  # or "jakes-correlated"
    carrier_hz: float = 5e9
    spacing_m: float | None = None  # default: half carrier wavelength

    def __post_init__(self):
        if self.nt < 1 or self.nr < 1:
            raise ValueError("nt and nr must be >= 1")
        if self.model not in ("iid-rayleigh", "jakes-correlated"):
            raise ValueError(f"unknown channel model {self.model!r}")

    @property
    def gamma(self) -> float:
        """Overloading ratio Nt/Nr."""
        return self.nt / self.nr

    @property
    def spacing(self) -> float:
        if self.spacing_m is not None:
            return self.spacing_m
        return C_LIGHT / (2.0 * self.carrier_hz)


@dataclass
class ImpairmentParams:
    """Gauss-Markov CSI uncertainty tau, RF distortion level eta, and
    spatial correlation signatures (Hermitian PSD, unit diagonal)."""

    tau: float = 0.0
    eta: float = 0.0
    phi_r: np.ndarray | None = None
    phi_t: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")
        if self.eta < 0.0:
            raise ValueError("eta must be >= 0")

    def resolved(self, nt: int, nr: int) -> "ImpairmentParams":
        """Fill identity correlation signatures for the given dimensions."""
        phi_r = np.eye(nr, dtype=complex) if self.phi_r is None else self.phi_r
        phi_t = np.eye(nt, dtype=complex) if self.phi_t is None else self.phi_t
        return ImpairmentParams(self.tau, self.eta, phi_r, phi_t)


@dataclass
class ChannelRealization:
    h_true: np.ndarray  # Nr x Nt, what the wave actually saw
    h_est: np.ndarray   # Nr x Nt, what the detector is told
    e: np.ndarray       # error matrix, kept for validation only


def jakes_signature(n: int, f_c: float, d: float) -> np.ndarray:
    """Jakes spatial correlation: entry (k,l) = J0(2 pi f_c d |k-l| / c)."""
    if n < 1 or f_c <= 0 or d <= 0:
        raise ValueError("need n >= 1, f_c > 0, d > 0")
    lags = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return j0(2.0 * np.pi * f_c * d * lags / C_LIGHT)


def sqrtm_psd(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Hermitian matrix square root; eigenvalues below -tol*||a|| are an error,
    small negatives (Bessel signatures can be numerically indefinite) clamp to 0."""
    w, v = np.linalg.eigh(a)
    floor = -tol * max(abs(w[-1]), 1.0)
    if w[0] < floor:
        raise ValueError("correlation matrix is not PSD")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def correlation_for(spec: ChannelSpec) -> tuple[np.ndarray, np.ndarray]:
    """(phi_r, phi_t) implied by the channel spec."""
    if spec.model == "iid-rayleigh":
        return np.eye(spec.nr, dtype=complex), np.eye(spec.nt, dtype=complex)
    phi_r = jakes_signature(spec.nr, spec.carrier_hz, spec.spacing).astype(complex)
    phi_t = jakes_signature(spec.nt, spec.carrier_hz, spec.spacing).astype(complex)
    return phi_r, phi_t


def _cgauss(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0,1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channel(spec: ChannelSpec, imp: ImpairmentParams, rng: np.random.Generator) -> ChannelRealization:
    """Doubly-correlated draw: Hhat = Phi_r^(1/2) H_iid Phi_t^(1/2); the true
    channel combines the known estimate with an unknown error matrix,
    H = sqrt(1-tau^2) Hhat + tau E."""
    imp = imp.resolved(spec.nt, spec.nr)
    sr = sqrtm_psd(imp.phi_r)
    st = sqrtm_psd(imp.phi_t)
    h_est = sr @ _cgauss(rng, (spec.nr, spec.nt)) @ st
    e = sr @ _cgauss(rng, (spec.nr, spec.nt)) @ st
    h_true = np.sqrt(1.0 - imp.tau ** 2) * h_est + imp.tau * e
    return ChannelRealization(h_true=h_true, h_est=h_est, e=e)


def transmit(s: np.ndarray, imp: ImpairmentParams, rng: np.random.Generator) -> np.ndarray:
    """Add hardware distortion: x = s + w, w ~ CN(0, eta I)."""
    if imp.eta == 0.0:
        return np.asarray(s, dtype=complex)
    return s + np.sqrt(imp.eta) * _cgauss(rng, len(s))


def receive(h_true: np.ndarray, x: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """y = H x + n with n ~ CN(0, sigma2 I)."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    y = h_true @ x
    if sigma2 > 0:
        y = y + np.sqrt(sigma2) * _cgauss(rng, len(y))
    return y


def normalize_received(y: np.ndarray, tau: float) -> np.ndarray:
    """y_bar = y / sqrt(1 - tau^2)."""
    if tau >= 1.0:
        raise ValueError("tau = 1 is degenerate (all-error CSI)")
    return np.asarray(y) / np.sqrt(1.0 - tau ** 2)


def effective_noise_covariance(h_est: np.ndarray, imp: ImpairmentParams, sigma2: float):
    """Covariance of the total effective noise after normalization,
    split into the correlated part and the white part:

        Sigma_C = eta Hhat Hhat^H + tau^2/(1-tau^2) (1+eta) Tr{Phi_t} Phi_r
        Sigma_U = sigma2/(1-tau^2) I
    """
    nr, nt = h_est.shape
    imp = imp.resolved(nt, nr)
    if imp.tau >= 1.0:
        raise ValueError("tau = 1 is degenerate")
    sigma_c = imp.eta * (h_est @ h_est.conj().T)
    if imp.tau > 0.0:
        sigma_c = sigma_c + (imp.tau ** 2 / (1.0 - imp.tau ** 2)) * (1.0 + imp.eta) \
            * np.trace(imp.phi_t).real * imp.phi_r
    sigma_u = (sigma2 / (1.0 - imp.tau ** 2)) * np.eye(nr, dtype=complex)
    return sigma_c, sigma_u


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Per-trial RNG stream: deterministic in (master_seed, key), independent
    of scheduling, so parallel runs are bit-reproducible."""
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key)))
