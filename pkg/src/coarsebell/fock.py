"""Brute-force truncated number-basis oracle.

Everything here is dense matrix algebra on a hard Fock cutoff: displacements
come from the matrix exponential of the generator (never from closed-form
matrix elements), the sign-binned quadrature observable from adaptive
integration of Hermite functions.  Slow on purpose; used only to validate
the coherent-state engine and, transitively, the closed-form correlations
at small amplitudes.

Quadrature convention: x = (a + a^dag)/sqrt(2), vacuum variance 1/2.  The
sign-binning threshold sits at x = 0, so the binned observable is invariant
under rescaling of x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.linalg import expm


class TruncationError(Exception):
    """Fock cutoff too small for the amplitudes involved."""


def required_dim(gamma: complex) -> int:
    """Minimum safe cutoff for a coherent amplitude."""
    g = abs(gamma)
    return math.ceil(g * g + 6.0 * g + 10.0)


def _check_dim(gamma: complex, dim: int) -> None:
    if dim < required_dim(gamma):
        raise TruncationError(
            f"dim={dim} too small for |gamma|={abs(gamma):.3f} "
            f"(need >= {required_dim(gamma)})"
        )


def destroy(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    n = np.arange(1, dim)
    a[n - 1, n] = np.sqrt(n)
    return a


def fock_coherent(gamma: complex, dim: int) -> np.ndarray:
    """Coherent-state vector, amplitudes e^{-|g|^2/2} g^n / sqrt(n!)."""
    _check_dim(gamma, dim)
    vec = np.empty(dim, dtype=complex)
    vec[0] = math.exp(-0.5 * abs(gamma) ** 2)
    for n in range(1, dim):
        vec[n] = vec[n - 1] * gamma / math.sqrt(n)
    return vec


def fock_displace(zeta: complex, dim: int) -> np.ndarray:
    """Displacement unitary from expm(zeta a^dag - conj(zeta) a)."""
    a = destroy(dim)
    return expm(zeta * a.conj().T - np.conj(zeta) * a)


def fock_kerr(dim: int) -> np.ndarray:
    """Number-diagonal phases exp(-i pi n^2 / 2).

    This is the unique number-diagonal unitary sending a coherent state to
    the balanced superposition e^{-i pi/4}(|g> + i|-g>)/sqrt(2).
    """
    n = np.arange(dim)
    return np.diag(np.exp(-0.5j * math.pi * n * n))


@lru_cache(maxsize=16)
def _beamsplit_cached(t: float, dim: int) -> np.ndarray:
    a = destroy(dim)
    eye = np.eye(dim)
    amode = np.kron(a, eye)
    bmode = np.kron(eye, a)
    xi = math.acos(t)
    gen = xi * (amode.conj().T @ bmode - amode @ bmode.conj().T)
    return expm(gen)


def fock_beamsplit(t: float, dim: int) -> np.ndarray:
    """Two-mode mixer with label action (gA, gB) -> (t gA + r gB, -r gA + t gB)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("transmission amplitude must be in [0, 1]")
    return _beamsplit_cached(float(t), dim)


def loss_kraus(eta: float, dim: int) -> list[np.ndarray]:
    """Kraus operators of the transmissivity-eta loss channel."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must be in (0, 1]")
    ops = []
    for k in range(dim):
        ek = np.zeros((dim, dim), dtype=complex)
        for n in range(k, dim):
            ek[n - k, n] = math.sqrt(math.comb(n, k)) * math.sqrt(
                eta ** (n - k) * (1.0 - eta) ** k
            )
        if np.any(ek):
            ops.append(ek)
    return ops


def fock_loss(rho: np.ndarray, eta: float, dim: int) -> np.ndarray:
    """Apply the single-mode loss channel as an explicit Kraus sum."""
    out = np.zeros_like(rho)
    for ek in loss_kraus(eta, dim):
        out += ek @ rho @ ek.conj().T
    return out


def adjoint_loss(obs: np.ndarray, eta: float, dim: int) -> np.ndarray:
    """Heisenberg-picture loss: sum_k E_k^dag obs E_k."""
    out = np.zeros((dim, dim), dtype=complex)
    for ek in loss_kraus(eta, dim):
        out += ek.conj().T @ obs @ ek
    return out


def _hermite_functions(x: np.ndarray, nmax: int) -> np.ndarray:
    """Orthonormal Hermite functions psi_0..psi_{nmax-1} at points x."""
    psi = np.zeros((nmax, len(x)))
    psi[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax > 1:
        psi[1] = math.sqrt(2.0) * x * psi[0]
    for n in range(1, nmax - 1):
        psi[n + 1] = math.sqrt(2.0 / (n + 1)) * x * psi[n] - math.sqrt(
            n / (n + 1)
        ) * psi[n - 1]
    return psi


@lru_cache(maxsize=8)
def fock_sign(dim: int) -> np.ndarray:
    """Matrix of sign(x) in the number basis, by adaptive quadrature.

    The parity selection rule S_mn = 0 for m = n (mod 2) is enforced
    exactly; odd-parity elements are 2 * integral over (0, inf), evaluated
    in one adaptive vector-valued pass.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    upper = math.sqrt(2.0 * dim + 1.0) + 12.0
    pairs = [(m, n) for m in range(dim) for n in range(m + 1, dim) if (m + n) % 2]

    def integrand(x: float) -> np.ndarray:
        psi = _hermite_functions(np.array([x]), dim)[:, 0]
        return np.array([psi[m] * psi[n] for m, n in pairs])

    vals, _ = integrate.quad_vec(
        integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-12, limit=400
    )
    s = np.zeros((dim, dim))
    for (m, n), v in zip(pairs, vals):
        s[m, n] = s[n, m] = 2.0 * v
    return s


@dataclass
class FockState:
    """Dense density matrix with truncation-adequacy validation."""

    dim: int
    rho: np.ndarray

    def validate(self, tail_levels: int = 5, tail_tol: float = 1e-10) -> None:
        herm = np.max(np.abs(self.rho - self.rho.conj().T))
        if herm > 1e-10:
            raise ValueError(f"not Hermitian: deviation {herm:.2e}")
        tr = np.trace(self.rho).real
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"trace {tr} not within 1e-8 of 1")
        eigs = np.linalg.eigvalsh(self.rho)
        if eigs.min() < -1e-8:
            raise ValueError(f"negative eigenvalue {eigs.min():.2e}")
        pops = np.diag(self.rho).real
        side = int(round(math.sqrt(len(pops))))
        if side * side == len(pops) and side > 1:
            # two-mode state stored on a dim^2 lattice
            grid = pops.reshape(side, side)
            tail = grid[-tail_levels:, :].sum() + grid[:, -tail_levels:].sum()
        else:
            tail = pops[-tail_levels:].sum()
        if tail > tail_tol:
            raise TruncationError(f"tail population {tail:.2e} exceeds {tail_tol:.0e}")


@dataclass(frozen=True)
class BellScenario:
    """One correlation evaluation: state family, thermal parameters, settings.

    ``settings`` holds (theta_A, theta_B) for sign-binned homodyne after the
    two-Kerr rotation, or ((theta, phi), (theta, phi)) pairs for the
    three-displacement rotation sequence.
    """

    V: float
    d: float
    eta: float
    family: str = "qubit"  # qubit | alt
    settings: tuple = (0.0, 0.0)
    kind: str = "bell"  # bell | leggett


def bell_setting_unitary(theta: float, d: float, dim: int) -> np.ndarray:
    """Kerr - displacement(i theta / 2d) - Kerr on one mode."""
    kerr = fock_kerr(dim)
    return kerr @ fock_displace(0.5j * theta / d, dim) @ kerr


def leggett_setting_unitary(theta: float, phi: float, d: float, dim: int) -> np.ndarray:
    """Five-step sequence realizing the out-of-plane rotation R(theta, phi).

    Temporal order: displace(-i phi/4d), Kerr, displace(i theta/4d), Kerr,
    displace(+i phi/4d).  Projected onto the span of |d>, |-d| this acts, up
    to a global phase, as the Hermitian rotation
    [[sin(t/2), e^{i p} cos(t/2)], [e^{-i p} cos(t/2), -sin(t/2)]]
    (fidelity ~1 - O(1/d^2); each displacement contributes an extra half
    turn of phase through the coherent-overlap projection, which is why the
    quarter-scale displacement realizes the half-angle rotation).
    """
    kerr = fock_kerr(dim)
    d_phi_first = fock_displace(-0.25j * phi / d, dim)
    d_theta = fock_displace(0.25j * theta / d, dim)
    d_phi_last = fock_displace(0.25j * phi / d, dim)
    return d_phi_last @ kerr @ d_theta @ kerr @ d_phi_first


def _setting_unitary(scenario: BellScenario, setting, dim: int) -> np.ndarray:
    if scenario.kind == "bell":
        return bell_setting_unitary(float(setting), scenario.d, dim)
    theta, phi = setting
    return leggett_setting_unitary(float(theta), float(phi), scenario.d, dim)


def lossy_sign_observable(unitary: np.ndarray, eta: float, dim: int) -> np.ndarray:
    """Heisenberg observable U^dag L*(S) U for one mode."""
    s = fock_sign(dim)
    return unitary.conj().T @ adjoint_loss(s, eta, dim) @ unitary


def _branch_vectors(scenario: BellScenario, alpha: complex, beta: complex, dim: int):
    """Constituent product-state pieces of one phase-space branch.

    Returns (coeffs, kets_A, kets_B) so the branch density operator is
    sum_{jk} c_j c_k^* |A_j B_j><A_k B_k|.
    """
    if scenario.family == "qubit":
        coeffs = np.array([1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)], dtype=complex)
        kets_a = [fock_coherent(alpha, dim), fock_coherent(-alpha, dim)]
        kets_b = [fock_coherent(beta, dim), fock_coherent(-beta, dim)]
        return coeffs, kets_a, kets_b
    if scenario.family == "alt":
        # Kerr on A, 50:50 mix with vacuum B, then the phase displacement on A.
        q = np.exp(-0.25j * math.pi) / math.sqrt(2.0)
        delta = alpha / math.sqrt(2.0)
        zeta = 0.125j * math.pi / scenario.d
        disp = fock_displace(zeta, dim)
        coeffs = np.array([q, 1j * q], dtype=complex)
        kets_a = [disp @ fock_coherent(delta, dim), disp @ fock_coherent(-delta, dim)]
        kets_b = [fock_coherent(-delta, dim), fock_coherent(delta, dim)]
        return coeffs, kets_a, kets_b
    raise ValueError(f"unknown family {scenario.family!r}")


def _pfunc_nodes(V: float, d: float, order: int):
    """Tensor Gauss-Hermite discretization of the thermal phase-space weight."""
    if V < 1.0:
        raise ValueError("V must be >= 1")
    if V == 1.0:
        return np.array([complex(d, 0.0)]), np.array([1.0])
    from numpy.polynomial.hermite import hermgauss

    nodes, weights = hermgauss(order)
    scale = math.sqrt((V - 1.0) / 2.0)
    re = d + scale * nodes
    im = scale * nodes
    alphas = (re[:, None] + 1j * im[None, :]).ravel()
    w = (np.outer(weights, weights) / math.pi).ravel()
    return alphas, w


def oracle_correlation(scenario: BellScenario, dim: int = 28, order: int = 8) -> float:
    """Sign-binned correlation Tr[rho S (x) S] for one scenario.

    Thermal mixing is handled by phase-space quadrature over branches; the
    per-branch value uses Heisenberg-picture observables so that only
    coherent-vector matrix elements are needed.
    """
    obs_a = lossy_sign_observable(
        _setting_unitary(scenario, scenario.settings[0], dim), scenario.eta, dim
    )
    obs_b = lossy_sign_observable(
        _setting_unitary(scenario, scenario.settings[1], dim), scenario.eta, dim
    )
    alphas, weights = _pfunc_nodes(scenario.V, scenario.d, order)
    num = 0.0
    den = 0.0
    if scenario.family == "qubit":
        betas, wbeta = alphas, weights
        for a_val, wa in zip(alphas, weights):
            coeffs, kets_a, _ = _branch_vectors(scenario, a_val, 0.0, dim)
            ma = _pair_elements(kets_a, obs_a)
            na = _pair_elements(kets_a, None)
            for b_val, wb in zip(betas, wbeta):
                _, _, kets_b = _branch_vectors(scenario, 0.0, b_val, dim)
                mb = _pair_elements(kets_b, obs_b)
                nb = _pair_elements(kets_b, None)
                cc = np.outer(coeffs, coeffs.conj())
                num += wa * wb * float(np.sum(cc * ma.T * mb.T).real)
                den += wa * wb * float(np.sum(cc * na.T * nb.T).real)
    else:
        for a_val, wa in zip(alphas, weights):
            coeffs, kets_a, kets_b = _branch_vectors(scenario, a_val, 0.0, dim)
            ma = _pair_elements(kets_a, obs_a)
            mb = _pair_elements(kets_b, obs_b)
            na = _pair_elements(kets_a, None)
            nb = _pair_elements(kets_b, None)
            cc = np.outer(coeffs, coeffs.conj())
            num += wa * float(np.sum(cc * ma.T * mb.T).real)
            den += wa * float(np.sum(cc * na.T * nb.T).real)
    if abs(den) < 1e-300:
        raise ValueError("zero-trace state")
    return num / den


def _pair_elements(kets, obs) -> np.ndarray:
    """Matrix <k_j| obs |k_i> over a small list of vectors (obs=None -> overlap)."""
    mat = np.stack(kets)
    if obs is None:
        return mat.conj() @ mat.T
    return mat.conj() @ obs @ mat.T


def oracle_state(scenario: BellScenario, dim: int = 24, order: int = 6) -> np.ndarray:
    """Explicit (unnormalized) two-mode density matrix after settings and loss.

    Dense and memory-hungry; intended for joint-probability checks at small
    cutoffs rather than for correlations (use oracle_correlation there).
    """
    ua = _setting_unitary(scenario, scenario.settings[0], dim)
    ub = _setting_unitary(scenario, scenario.settings[1], dim)
    u_two = np.kron(ua, ub)
    alphas, weights = _pfunc_nodes(scenario.V, scenario.d, order)
    rho = np.zeros((dim * dim, dim * dim), dtype=complex)
    if scenario.family == "qubit":
        for a_val, wa in zip(alphas, weights):
            coeffs, kets_a, _ = _branch_vectors(scenario, a_val, 0.0, dim)
            for b_val, wb in zip(alphas, weights):
                _, _, kets_b = _branch_vectors(scenario, 0.0, b_val, dim)
                psi = sum(
                    c * np.kron(ka, kb) for c, ka, kb in zip(coeffs, kets_a, kets_b)
                )
                rho += wa * wb * np.outer(psi, psi.conj())
    else:
        for a_val, wa in zip(alphas, weights):
            coeffs, kets_a, kets_b = _branch_vectors(scenario, a_val, 0.0, dim)
            psi = sum(c * np.kron(ka, kb) for c, ka, kb in zip(coeffs, kets_a, kets_b))
            rho += wa * np.outer(psi, psi.conj())
    rho = u_two @ rho @ u_two.conj().T
    rho = _loss_two_mode(rho, scenario.eta, dim)
    return rho


def _loss_two_mode(rho: np.ndarray, eta: float, dim: int) -> np.ndarray:
    if eta == 1.0:
        return rho
    kraus = loss_kraus(eta, dim)
    r4 = rho.reshape(dim, dim, dim, dim)  # (A-row, B-row, A-col, B-col)
    out = np.zeros_like(r4)
    for ek in kraus:
        out += np.einsum("xi,ijkl,yk->xjyl", ek, r4, ek.conj())
    r4, out = out, np.zeros_like(r4)
    for ek in kraus:
        out += np.einsum("xj,ijkl,yl->ixky", ek, r4, ek.conj())
    return out.reshape(dim * dim, dim * dim)


def oracle_joint_probs(scenario: BellScenario, dim: int = 24, order: int = 6):
    """Joint sign-bin probabilities (P++, P+-, P-+, P--)."""
    rho = oracle_state(scenario, dim=dim, order=order)
    tr = np.trace(rho).real
    s = fock_sign(dim)
    eye = np.eye(dim)
    proj_p = 0.5 * (eye + s)
    proj_m = 0.5 * (eye - s)
    probs = []
    for pa in (proj_p, proj_m):
        for pb in (proj_p, proj_m):
            probs.append(float(np.trace(np.kron(pa, pb) @ rho).real) / tr)
    return tuple(probs)
