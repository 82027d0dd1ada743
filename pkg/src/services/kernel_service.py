import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Mapping

import numpy as np
from scipy.special import erfc

from src.services.coefficient_service import (
    ShiftParameters,
    cosine_coefficients,
    partial_a_functional,
)

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
# sup |phi'| = sqrt(2) e^{-1/2}, attained at x = -1/sqrt(2)
GAUSSIAN_DERIVATIVE_SUP = math.sqrt(2.0) * math.exp(-0.5)
# sup |phi''| = 2, attained at x = 0
GAUSSIAN_SECOND_DERIVATIVE_SUP = 2.0
_X3 = math.sqrt((3.0 - math.sqrt(6.0)) / 2.0)
# sup |phi'''|, attained at x^2 = (3 - sqrt 6)/2
GAUSSIAN_THIRD_DERIVATIVE_SUP = abs(12.0 * _X3 - 8.0 * _X3**3) * math.exp(-_X3 * _X3)
# Band radius target for the analytic transforms.
BAND_EPSILON = 1e-15
# Evaluation chunk, in (points x terms) products.
_CHUNK = 1 << 21


def _scalar_or_array(values: np.ndarray):
    return values[()] if values.ndim == 0 else values


def gaussian(x):
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(np.exp(-x * x))


def gaussian_derivative(x):
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(-2.0 * x * np.exp(-x * x))


def gaussian_second_derivative(x):
    x = np.asarray(x, dtype=float)
    return _scalar_or_array((4.0 * x * x - 2.0) * np.exp(-x * x))


def gaussian_hat(omega):
    """Unitary Fourier transform of exp(-x^2): exp(-omega^2/4)/sqrt(2)."""
    omega = np.asarray(omega, dtype=float)
    return _scalar_or_array(np.exp(-omega * omega / 4.0) / math.sqrt(2.0))


def fejer(x):
    """
    Fejer kernel h(x) = (1/sqrt(2 pi)) (sin(x/2)/(x/2))^2.
    np.sinc resolves the removable singularity, h(0) = 1/sqrt(2 pi).
    """
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(np.sinc(x / (2.0 * np.pi)) ** 2 / SQRT_2PI)


def fejer_hat(omega):
    omega = np.asarray(omega, dtype=float)
    return _scalar_or_array(np.maximum(1.0 - np.abs(omega), 0.0))


def fejer_scaled(r: float, t):
    """h_r(t) = r h(r t); its transform is the triangle max(1 - |omega|/r, 0)."""
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    return r * fejer(r * np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class TranslateNetwork:
    """
    Finite sum sum_k c_k phi(x - lambda k) of Gaussian translates.

    shifts holds the integer indices k, coefficients the matching c_k.
    """
    lam: float
    shifts: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive and finite, got {self.lam}")
        shifts = np.asarray(self.shifts, dtype=np.int64).reshape(-1)
        coefficients = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if shifts.shape != coefficients.shape:
            raise ValueError("shifts and coefficients must have the same length")
        if len(np.unique(shifts)) != len(shifts):
            raise ValueError("shift indices must be distinct")
        order = np.argsort(shifts)
        shifts, coefficients = shifts[order], coefficients[order]
        shifts.setflags(write=False)
        coefficients.setflags(write=False)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def from_mapping(cls, lam: float, coefficients: Mapping[int, float]) -> "TranslateNetwork":
        items = sorted(coefficients.items())
        return cls(lam, np.array([k for k, _ in items], dtype=np.int64), np.array([c for _, c in items], dtype=float))

    @property
    def centers(self) -> np.ndarray:
        return self.lam * self.shifts

    @property
    def max_shift(self) -> int:
        return int(np.max(np.abs(self.shifts))) if len(self.shifts) else 0

    @property
    def coefficient_l1(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    @property
    def coefficient_l2_squared(self) -> float:
        return float(np.sum(self.coefficients**2))

    def is_symmetric(self) -> bool:
        mapping = self.as_mapping()
        return all(mapping.get(-k, 0.0) == c for k, c in mapping.items())

    def as_mapping(self) -> Dict[int, float]:
        return {int(k): float(c) for k, c in zip(self.shifts, self.coefficients)}

    def scaled(self, factor: float) -> "TranslateNetwork":
        return TranslateNetwork(self.lam, self.shifts, factor * self.coefficients)

    def to_payload(self) -> dict:
        """JSON form: lambda and a list of [k, c_k] pairs."""
        return {"lambda": self.lam, "coefficients": [[int(k), float(c)] for k, c in zip(self.shifts, self.coefficients)]}

    @classmethod
    def from_payload(cls, payload: dict) -> "TranslateNetwork":
        return cls.from_mapping(float(payload["lambda"]), {int(k): float(c) for k, c in payload["coefficients"]})


def _sum_translates(net: TranslateNetwork, x, kernel: Callable) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    out = np.empty_like(flat)
    terms = max(len(net.shifts), 1)
    step = max(_CHUNK // terms, 1)
    for start in range(0, len(flat), step):
        block = flat[start:start + step]
        out[start:start + step] = kernel(block[:, None] - net.centers[None, :]) @ net.coefficients
    return _scalar_or_array(out.reshape(x.shape))


def evaluate(net: TranslateNetwork, x):
    """P(x) = sum_k c_k phi(x - lambda k)."""
    return _sum_translates(net, x, lambda u: np.exp(-u * u))


def evaluate_derivative(net: TranslateNetwork, x):
    """P'(x), by termwise differentiation."""
    return _sum_translates(net, x, lambda u: -2.0 * u * np.exp(-u * u))


def evaluate_second_derivative(net: TranslateNetwork, x):
    return _sum_translates(net, x, lambda u: (4.0 * u * u - 2.0) * np.exp(-u * u))


def canonical_witness(p: ShiftParameters) -> TranslateNetwork:
    """
    P_n = 2 A_n(lambda) phi + sum_{k=1}^n a_k (phi(x + lambda k) + phi(x - lambda k)).
    A_n is chosen so that P_n(0) = 0.
    """
    a = cosine_coefficients(p.n)[1:]
    shifts = np.concatenate([-np.arange(p.n, 0, -1), [0], np.arange(1, p.n + 1)])
    coefficients = np.concatenate([a[::-1], [2.0 * partial_a_functional(p.lam, p.n)], a])
    logger.info(f"Built canonical witness for lambda={p.lam}, n={p.n}")
    return TranslateNetwork(p.lam, shifts, coefficients)


def trig_polynomial_T(p: ShiftParameters, omega):
    """T_n(omega) = sum_{k=1}^n a_k (cos(k lambda omega) - phi(lambda k))."""
    omega = np.asarray(omega, dtype=float)
    k = np.arange(1, p.n + 1, dtype=float)
    a = cosine_coefficients(p.n)[1:]
    offset = float(np.sum(a * np.exp(-((p.lam * k) ** 2))))
    flat = omega.reshape(-1)
    values = np.cos(np.outer(flat, p.lam * k)) @ a - offset
    return _scalar_or_array(values.reshape(omega.shape))


@dataclass(frozen=True)
class FourierProfile:
    """
    Analytic Fourier transform of a translate network.

    band_radius bounds the frequencies outside which |P_hat| < BAND_EPSILON;
    scan_step is the grid step used to isolate sign changes.
    """
    transform: Callable
    band_radius: float
    scan_step: float
    coefficient_l1: float
    is_real: bool = True

    def __call__(self, omega):
        return self.transform(omega)

    def tail_mass(self, radius: float) -> float:
        """Upper bound for the integral of |P_hat| over |omega| > radius."""
        return 2.0 * self.coefficient_l1 * math.sqrt(math.pi / 2.0) * float(erfc(radius / 2.0))


def band_radius(coefficient_l1: float, epsilon: float = BAND_EPSILON) -> float:
    """Smallest R with exp(-R^2/4) sum|c_k| / sqrt(2) < epsilon."""
    if coefficient_l1 <= 0:
        return 1.0
    return 2.0 * math.sqrt(max(math.log(coefficient_l1 / (math.sqrt(2.0) * epsilon)), 0.25))


def analytic_fourier_transform(net: TranslateNetwork) -> FourierProfile:
    """
    P_hat(omega) = phi_hat(omega) sum_k c_k exp(-i k lambda omega).

    Symmetric networks get the real cosine form; otherwise the callable is complex.
    """
    centers = net.centers
    coefficients = net.coefficients
    symmetric = net.is_symmetric()

    if symmetric:
        def transform(omega):
            omega = np.asarray(omega, dtype=float)
            flat = omega.reshape(-1)
            values = gaussian_hat(flat) * (np.cos(np.outer(flat, centers)) @ coefficients)
            return _scalar_or_array(np.asarray(values).reshape(omega.shape))
    else:
        def transform(omega):
            omega = np.asarray(omega, dtype=float)
            flat = omega.reshape(-1)
            values = gaussian_hat(flat) * (np.exp(-1j * np.outer(flat, centers)) @ coefficients)
            return _scalar_or_array(np.asarray(values).reshape(omega.shape))

    scale = max(net.max_shift, 1) * max(net.lam, 1.0 / net.lam)
    return FourierProfile(
        transform=transform,
        band_radius=band_radius(net.coefficient_l1),
        scan_step=math.pi / (64.0 * scale),
        coefficient_l1=net.coefficient_l1,
        is_real=symmetric,
    )
