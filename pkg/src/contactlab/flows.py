"""Contact Hamiltonian vector fields, their flows, and discrete Legendre maps.

A scalar h on phase space generates the contact field X_h with Darboux
components

    Phi-dot = h - p_a dh/dp_a
    q-dot^a = -dh/dp_a
    p-dot_a = dh/dq^a + p_a dh/dPhi

so that eta[X_h] = h pointwise.  The quadratic generator
h = sum_i (q_i^2 + p_i^2)/2 rotates every conjugate pair at unit angular
speed; its time-pi/2 flow is the total Legendre transformation, realized
exactly by the discrete map below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, FrozenSet, Iterable, Optional, Tuple

import numpy as np

from .phasespace import DEFAULT_FD_STEP, DarbouxPoint, eval_eta


class IntegrationError(RuntimeError):
    """Flow integration produced a non-finite state."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


@dataclass(frozen=True)
class ContactHamiltonian:
    """A scalar on phase space with partial derivatives in the Z ordering.

    hessian, when present, returns the full (2n+1)x(2n+1) matrix of second
    partials and enables an analytic Jacobian for the generated field.
    uses_fd marks derivative callables that are finite-difference fallbacks.
    """

    name: str
    value: Callable[[DarbouxPoint], float]
    d_phi: Callable[[DarbouxPoint], float]
    d_q: Callable[[DarbouxPoint], np.ndarray]
    d_p: Callable[[DarbouxPoint], np.ndarray]
    hessian: Optional[Callable[[DarbouxPoint], np.ndarray]] = None
    uses_fd: bool = False

    @classmethod
    def from_value(cls, name: str, fn: Callable[[DarbouxPoint], float],
                   h_fd: float = DEFAULT_FD_STEP) -> "ContactHamiltonian":
        """Wrap a bare scalar with central-difference partials."""

        def d_phi(x):
            return (fn(x.shifted(0, h_fd)) - fn(x.shifted(0, -h_fd))) / (2 * h_fd)

        def d_q(x):
            return np.array([
                (fn(x.shifted(1 + a, h_fd)) - fn(x.shifted(1 + a, -h_fd))) / (2 * h_fd)
                for a in range(x.n)
            ])

        def d_p(x):
            return np.array([
                (fn(x.shifted(1 + x.n + a, h_fd)) - fn(x.shifted(1 + x.n + a, -h_fd))) / (2 * h_fd)
                for a in range(x.n)
            ])

        return cls(name=name, value=fn, d_phi=d_phi, d_q=d_q, d_p=d_p, uses_fd=True)

    def gradient(self, x: DarbouxPoint) -> np.ndarray:
        """All partials stacked in the Z ordering."""
        return np.concatenate(([self.d_phi(x)], self.d_q(x), self.d_p(x)))


@dataclass(frozen=True)
class ContactVectorField:
    """A vector field on phase space.

    eval_array, when present, evaluates on raw Z arrays of shape (..., 2n+1)
    and is the fast path used by the integrator.  jacobian, when present,
    returns J[A, B] = d X^A / d Z^B.
    """

    name: str
    eval: Callable[[DarbouxPoint], np.ndarray]
    jacobian: Optional[Callable[[DarbouxPoint], np.ndarray]] = None
    eval_array: Optional[Callable[[np.ndarray], np.ndarray]] = None


def total_legendre_hamiltonian(n: int = 2) -> ContactHamiltonian:
    """h = sum_i (q_i^2 + p_i^2)/2, the total Legendre generator."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def value(x: DarbouxPoint) -> float:
        return 0.5 * float(x.q @ x.q + x.p @ x.p)

    def hessian(x: DarbouxPoint) -> np.ndarray:
        H = np.eye(x.dim)
        H[0, 0] = 0.0
        return H

    return ContactHamiltonian(
        name="legendre_total",
        value=value,
        d_phi=lambda x: 0.0,
        d_q=lambda x: x.q.copy(),
        d_p=lambda x: x.p.copy(),
        hessian=hessian,
    )


def partial_legendre_hamiltonian(i: int, n: int = 2) -> ContactHamiltonian:
    """h_i = (q_i^2 + p_i^2)/2 for a single conjugate pair (1-based index)."""
    if not 1 <= i <= n:
        raise IndexError(f"pair index {i} out of range 1..{n}")
    k = i - 1

    def value(x: DarbouxPoint) -> float:
        return 0.5 * (x.q[k] ** 2 + x.p[k] ** 2)

    def d_q(x: DarbouxPoint) -> np.ndarray:
        out = np.zeros(x.n)
        out[k] = x.q[k]
        return out

    def d_p(x: DarbouxPoint) -> np.ndarray:
        out = np.zeros(x.n)
        out[k] = x.p[k]
        return out

    def hessian(x: DarbouxPoint) -> np.ndarray:
        H = np.zeros((x.dim, x.dim))
        H[1 + k, 1 + k] = 1.0
        H[1 + x.n + k, 1 + x.n + k] = 1.0
        return H

    return ContactHamiltonian(
        name=f"legendre_pair_{i}",
        value=value,
        d_phi=lambda x: 0.0,
        d_q=d_q,
        d_p=d_p,
        hessian=hessian,
    )


def hamiltonian_vector_field(h: ContactHamiltonian, h_fd: float = DEFAULT_FD_STEP) -> ContactVectorField:
    """The contact field generated by h, with eta[X_h] = h by construction."""

    def eval_x(x: DarbouxPoint) -> np.ndarray:
        n = x.n
        hp = np.asarray(h.d_p(x), dtype=float)
        hq = np.asarray(h.d_q(x), dtype=float)
        hphi = h.d_phi(x)
        out = np.empty(x.dim)
        out[0] = h.value(x) - float(x.p @ hp)
        out[1 : n + 1] = -hp
        out[n + 1 :] = hq + x.p * hphi
        return out

    if h.hessian is not None:

        def jacobian(x: DarbouxPoint) -> np.ndarray:
            n = x.n
            dim = x.dim
            grad = h.gradient(x)
            H = h.hessian(x)
            J = np.empty((dim, dim))
            psl = slice(n + 1, dim)
            qsl = slice(1, n + 1)
            # d_B (h - p_a h_{p_a})
            J[0, :] = grad - x.p @ H[psl, :]
            J[0, psl] -= grad[psl]
            # d_B (-h_{p_a})
            J[qsl, :] = -H[psl, :]
            # d_B (h_{q_a} + p_a h_Phi)
            J[psl, :] = H[qsl, :] + np.outer(x.p, H[0, :])
            J[psl, psl] += grad[0] * np.eye(n)
            return J

    else:

        def jacobian(x: DarbouxPoint) -> np.ndarray:
            dim = x.dim
            J = np.empty((dim, dim))
            for B in range(dim):
                J[:, B] = (eval_x(x.shifted(B, h_fd)) - eval_x(x.shifted(B, -h_fd))) / (2 * h_fd)
            return J

    return ContactVectorField(name=f"X[{h.name}]", eval=eval_x, jacobian=jacobian)


def _rotation_field(n: int, pairs: Tuple[int, ...], name: str) -> ContactVectorField:
    """Shared fast implementation of X_L and the single-pair generators."""
    dim = 2 * n + 1
    mask = np.zeros(n)
    mask[list(pairs)] = 1.0

    def eval_array(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        q = z[..., 1 : n + 1]
        p = z[..., n + 1 :]
        out = np.empty_like(z)
        out[..., 0] = 0.5 * ((q * q - p * p) * mask).sum(axis=-1)
        out[..., 1 : n + 1] = -p * mask
        out[..., n + 1 :] = q * mask
        return out

    def eval_x(x: DarbouxPoint) -> np.ndarray:
        return eval_array(x.to_array())

    def jacobian(x: DarbouxPoint) -> np.ndarray:
        J = np.zeros((dim, dim))
        J[0, 1 : n + 1] = x.q * mask
        J[0, n + 1 :] = -x.p * mask
        for a in pairs:
            J[1 + a, 1 + n + a] = -1.0
            J[1 + n + a, 1 + a] = 1.0
        return J

    return ContactVectorField(name=name, eval=eval_x, jacobian=jacobian, eval_array=eval_array)


def legendre_field(n: int = 2) -> ContactVectorField:
    """X_L, the generator of total Legendre transformations (all pairs rotate)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _rotation_field(n, tuple(range(n)), "X_L")


def partial_legendre_field(i: int, n: int = 2) -> ContactVectorField:
    """X_{L_i}: only the i-th conjugate pair rotates (1-based index)."""
    if not 1 <= i <= n:
        raise IndexError(f"pair index {i} out of range 1..{n}")
    return _rotation_field(n, (i - 1,), f"X_L{i}")


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    """Samples of an integral curve; coords rows follow the Z ordering."""

    times: np.ndarray
    coords: np.ndarray
    ic: DarbouxPoint
    dt: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        coords = np.asarray(self.coords, dtype=float)
        if len(times) != len(coords):
            raise ValueError("times and coords must have equal length")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if not np.array_equal(coords[0], self.ic.to_array()):
            raise ValueError("trajectory must start at the initial condition")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return len(self.times)

    def point(self, k: int) -> DarbouxPoint:
        return DarbouxPoint.from_array(self.coords[k])

    @cached_property
    def states(self) -> Tuple[DarbouxPoint, ...]:
        return tuple(DarbouxPoint.from_array(z) for z in self.coords)

    @property
    def final(self) -> DarbouxPoint:
        return self.point(len(self) - 1)


def _field_array_eval(X: ContactVectorField) -> Callable[[np.ndarray], np.ndarray]:
    if X.eval_array is not None:
        return X.eval_array

    def ev(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            return np.asarray(X.eval(DarbouxPoint.from_array(z)), dtype=float)
        return np.stack([ev(row) for row in z])

    return ev


def _rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _step_schedule(t_end: float, dt: float) -> list:
    """Step sizes covering [0, t_end] exactly, with one final partial step."""
    n_full = int(math.floor(t_end / dt + 1e-12))
    remainder = t_end - n_full * dt
    steps = [dt] * n_full
    if remainder > 1e-12 * max(dt, 1.0):
        steps.append(remainder)
    return steps


def flow_map(X: ContactVectorField, z0: np.ndarray, t_end: float, dt: float) -> np.ndarray:
    """Endpoint of the time-t_end flow for one state or a batch of states.

    z0 has shape (2n+1,) or (m, 2n+1); the result has the same shape.
    Classic RK4 with fixed step dt and a final partial step onto t_end.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    f = _field_array_eval(X)
    y = np.array(z0, dtype=float)
    t = 0.0
    for step in _step_schedule(t_end, dt):
        y_next = _rk4_step(f, y, step)
        if not math.isfinite(float(np.sum(y_next))):
            raise IntegrationError(
                f"flow of {X.name} became non-finite; last valid time t={t:.6g}", t
            )
        y = y_next
        t += step
    return y


def integrate_flow(X: ContactVectorField, ic: DarbouxPoint, t_end: float, dt: float) -> FlowTrajectory:
    """Integrate dZ/dt = X(Z) from ic with classic RK4 and record the curve."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    f = _field_array_eval(X)
    schedule = _step_schedule(t_end, dt)
    times = np.empty(len(schedule) + 1)
    coords = np.empty((len(schedule) + 1, ic.dim))
    times[0] = 0.0
    coords[0] = ic.to_array()
    y = coords[0].copy()
    t = 0.0
    for k, step in enumerate(schedule, start=1):
        y = _rk4_step(f, y, step)
        if not math.isfinite(float(np.sum(y))):
            raise IntegrationError(
                f"flow of {X.name} became non-finite; last valid time t={t:.6g}", t
            )
        t += step
        times[k] = t
        coords[k] = y
    return FlowTrajectory(times=times, coords=coords, ic=ic, dt=dt)


def closed_form_orbit(ic: DarbouxPoint, t: float) -> DarbouxPoint:
    """Exact state of the X_L flow at time t (all pairs rotate simultaneously).

    Per pair: p(t) = p cos t + q sin t, q(t) = -p sin t + q cos t, and
    Phi(t) = Phi + sum_i [ (q_i^2 - p_i^2)/2 sin t cos t - p_i q_i sin^2 t ].
    """
    s, c = math.sin(t), math.cos(t)
    q_t = -ic.p * s + ic.q * c
    p_t = ic.p * c + ic.q * s
    phi_t = ic.phi + float(np.sum(0.5 * (ic.q**2 - ic.p**2) * s * c - ic.p * ic.q * s * s))
    return DarbouxPoint(phi_t, q_t, p_t)


def closed_form_orbit_jacobian(ic: DarbouxPoint, t: float) -> np.ndarray:
    """Exact Jacobian of the time-t X_L flow map at ic."""
    n = ic.n
    s, c = math.sin(t), math.cos(t)
    J = np.zeros((ic.dim, ic.dim))
    J[0, 0] = 1.0
    J[0, 1 : n + 1] = ic.q * s * c - ic.p * s * s
    J[0, n + 1 :] = -ic.p * s * c - ic.q * s * s
    for a in range(n):
        J[1 + a, 1 + a] = c
        J[1 + a, 1 + n + a] = -s
        J[1 + n + a, 1 + a] = s
        J[1 + n + a, 1 + n + a] = c
    return J


@dataclass(frozen=True)
class LegendreMap:
    """A discrete (partial or total) Legendre transformation.

    index_set is the 1-based set of conjugate pairs to interchange.
    """

    index_set: FrozenSet[int]
    n: int = 2

    def __post_init__(self):
        object.__setattr__(self, "index_set", frozenset(int(i) for i in self.index_set))
        if not self.index_set:
            raise ValueError("index set must be nonempty")
        if not all(1 <= i <= self.n for i in self.index_set):
            raise ValueError(f"pair indices must lie in 1..{self.n}, got {sorted(self.index_set)}")

    @classmethod
    def total(cls, n: int = 2) -> "LegendreMap":
        return cls(frozenset(range(1, n + 1)), n)

    @classmethod
    def pairs(cls, indices: Iterable[int], n: int = 2) -> "LegendreMap":
        return cls(frozenset(indices), n)

    @property
    def is_total(self) -> bool:
        return self.index_set == frozenset(range(1, self.n + 1))

    def label(self) -> str:
        return "total" if self.is_total else "+".join(str(i) for i in sorted(self.index_set))


def discrete_legendre(x: DarbouxPoint, m: LegendreMap) -> DarbouxPoint:
    """Interchange the selected pairs: q -> -p, p -> q, Phi -> Phi - sum p_i q_i."""
    if m.n != x.n:
        raise ValueError(f"map is for n={m.n}, point has n={x.n}")
    q = x.q.copy()
    p = x.p.copy()
    phi = x.phi
    for i in sorted(m.index_set):
        k = i - 1
        phi -= x.p[k] * x.q[k]
        q[k] = -x.p[k]
        p[k] = x.q[k]
    return DarbouxPoint(phi, q, p)


def jacobian_discrete_legendre(m: LegendreMap, x: DarbouxPoint) -> np.ndarray:
    """Exact Jacobian of discrete_legendre at x (unit determinant)."""
    if m.n != x.n:
        raise ValueError(f"map is for n={m.n}, point has n={x.n}")
    n = x.n
    J = np.eye(x.dim)
    for i in sorted(m.index_set):
        k = i - 1
        J[0, 1 + k] = -x.p[k]
        J[0, 1 + n + k] = -x.q[k]
        J[1 + k, 1 + k] = 0.0
        J[1 + k, 1 + n + k] = -1.0
        J[1 + n + k, 1 + n + k] = 0.0
        J[1 + n + k, 1 + k] = 1.0
    return J


def generation_residual(h: ContactHamiltonian, X: ContactVectorField, x: DarbouxPoint) -> float:
    """|eta[X](x) - h(x)|, the defining relation of the generated field."""
    return abs(eval_eta(x).pair(X.eval(x)) - h.value(x))
