"""
Small dense log-barrier solver for the CCCP subproblem and for feasibility restoration.

Complex beams (w, P) are stacked column-major into xi = vec([w, P]) and handled as the
real vector x = [Re xi; Im xi], normalized by sqrt(P_t) so the power budget reads
||x||^2 <= 1. Every constraint is kept in the smooth form f(X) <= 0.
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from metrics import BeamformingSolution, harvested_powers
from models import SystemConfig
from scenario import EffectiveChannels

logger = logging.getLogger(__name__)

ENERGY_MARGIN = 1.1
BARRIER_MU = 10.0
NEWTON_TOL = 1e-9
NEWTON_MAX = 80
NEWTON_TOTAL_MAX = 2000
LS_ALPHA = 0.01
LS_BETA = 0.5
WARM_NEWTON_MAX = 3
START_DEPTH = 1e-9
PHASE_ONE_DEPTH = 1e-6
RESTART_DEPTH = 1e-3
Y_LIFT = 1e-9
NOISE_ZONE = 1e-3
NOISE_RTOL = 1e-13
NULL_FLOOR = 1e-3
AN_SHARE = 0.5


class InfeasibleError(RuntimeError):
    """No point meets the power budget and every energy-harvesting threshold."""


@dataclass(frozen=True)
class SolverReport:
    status: Literal["optimal", "max-iter", "infeasible"]
    objective: float
    gap: float
    stationarity: float
    iterations: int


# ---------------------------------------------------------------------------
# Real-ification helpers
# ---------------------------------------------------------------------------

def stack_beams(w: np.ndarray, p_mat: np.ndarray) -> np.ndarray:
    return np.concatenate([w, p_mat.T.ravel()])


def unstack_beams(xi: np.ndarray, n_s: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    return xi[:n_s].copy(), xi[n_s:].reshape(m, n_s).T.copy()


def to_real(xi: np.ndarray) -> np.ndarray:
    return np.concatenate([xi.real, xi.imag])


def to_complex(x: np.ndarray) -> np.ndarray:
    n = x.shape[0] // 2
    return x[:n] + 1j * x[n:]


def selector(g: np.ndarray, column: int, n_cols: int) -> np.ndarray:
    """c such that c^H xi = g^H (column `column` of [w, P])."""
    n_s = g.shape[0]
    c = np.zeros(n_s * n_cols, dtype=complex)
    c[column * n_s:(column + 1) * n_s] = g
    return c


def re_row(c: np.ndarray) -> np.ndarray:
    """Re{c^H xi} = re_row(c) . x"""
    return np.concatenate([c.real, c.imag])


def im_row(c: np.ndarray) -> np.ndarray:
    """Im{c^H xi} = im_row(c) . x"""
    return np.concatenate([-c.imag, c.real])


def gram(c: np.ndarray) -> np.ndarray:
    """|c^H xi|^2 = x^T gram(c) x"""
    a, b = re_row(c), im_row(c)
    return np.outer(a, a) + np.outer(b, b)


# ---------------------------------------------------------------------------
# Barrier building blocks. Each term works on the full variable vector X.
# ---------------------------------------------------------------------------

class _Term:
    def value(self, X: np.ndarray) -> float:
        raise NotImplementedError

    def derivatives(self, X: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def in_domain(self, X: np.ndarray) -> bool:
        return True


class _Linear(_Term):
    def __init__(self, a: np.ndarray, b: float = 0.0):
        self.a = a
        self.b = b

    def value(self, X):
        return float(self.a @ X + self.b)

    def derivatives(self, X):
        return self.value(X), self.a.copy(), np.zeros((X.size, X.size))


class _Ball(_Term):
    """||X[:n_x]||^2 - 1"""

    def __init__(self, n_x: int):
        self.n_x = n_x

    def value(self, X):
        x = X[:self.n_x]
        return float(x @ x - 1.0)

    def derivatives(self, X):
        grad = np.zeros(X.size)
        grad[:self.n_x] = 2.0 * X[:self.n_x]
        hess = np.zeros((X.size, X.size))
        hess[:self.n_x, :self.n_x] = 2.0 * np.eye(self.n_x)
        return self.value(X), grad, hess


class _QuadOverAffine(_Term):
    """x^T Q x / (d0 + d . x) - X[y_index]"""

    def __init__(self, quad: np.ndarray, d0: float, d: np.ndarray, y_index: int):
        self.quad = quad
        self.d0 = d0
        self.d = d
        self.n_x = d.size
        self.y_index = y_index

    def _denominator(self, X):
        return self.d0 + float(self.d @ X[:self.n_x])

    def in_domain(self, X):
        return self._denominator(X) > 0.0

    def value(self, X):
        x = X[:self.n_x]
        return float(x @ self.quad @ x) / self._denominator(X) - X[self.y_index]

    def derivatives(self, X):
        n = self.n_x
        x = X[:n]
        den = self._denominator(X)
        q = float(x @ self.quad @ x)
        dq = 2.0 * self.quad @ x
        grad = np.zeros(X.size)
        grad[:n] = dq / den - q * self.d / den ** 2
        grad[self.y_index] = -1.0
        hess = np.zeros((X.size, X.size))
        cross = np.outer(dq, self.d)
        hess[:n, :n] = (
            2.0 * self.quad / den
            - (cross + cross.T) / den ** 2
            + 2.0 * q * np.outer(self.d, self.d) / den ** 3
        )
        return q / den - X[self.y_index], grad, hess


class _Shifted(_Term):
    """f(X[:-1]) - X[-1], the phase-one form of a constraint."""

    def __init__(self, inner: _Term):
        self.inner = inner

    def in_domain(self, X):
        return self.inner.in_domain(X[:-1])

    def value(self, X):
        return self.inner.value(X[:-1]) - X[-1]

    def derivatives(self, X):
        val, g, h = self.inner.derivatives(X[:-1])
        grad = np.append(g, -1.0)
        hess = np.zeros((X.size, X.size))
        hess[:-1, :-1] = h
        return val - X[-1], grad, hess


class _SubproblemObjective(_Term):
    """z e(x) + (v/p) sum (1 + y)^p in normalized beams."""

    def __init__(self, quad: np.ndarray, lin: np.ndarray, const: float, v: float, p: float, n_x: int, m: int):
        self.quad = quad
        self.lin = lin
        self.const = const
        self.v = v
        self.p = p
        self.n_x = n_x
        self.m = m

    def in_domain(self, X):
        return bool(np.all(1.0 + X[self.n_x:self.n_x + self.m] > 0.0))

    def value(self, X):
        x = X[:self.n_x]
        y = X[self.n_x:self.n_x + self.m]
        smooth = self.v / self.p * float(np.sum((1.0 + y) ** self.p))
        return float(x @ self.quad @ x) + float(self.lin @ x) + self.const + smooth

    def derivatives(self, X):
        n, m = self.n_x, self.m
        x = X[:n]
        y1 = 1.0 + X[n:n + m]
        grad = np.zeros(X.size)
        grad[:n] = 2.0 * self.quad @ x + self.lin
        grad[n:n + m] = self.v * y1 ** (self.p - 1.0)
        hess = np.zeros((X.size, X.size))
        hess[:n, :n] = 2.0 * self.quad
        hess[n:n + m, n:n + m] = np.diag(self.v * (self.p - 1.0) * y1 ** (self.p - 2.0))
        return self.value(X), grad, hess


# ---------------------------------------------------------------------------
# Barrier method
# ---------------------------------------------------------------------------

def _barrier_value(objective: _Term, constraints: Sequence[_Term], X: np.ndarray, t: float) -> float:
    if not objective.in_domain(X) or not all(c.in_domain(X) for c in constraints):
        return np.inf
    vals = np.array([c.value(X) for c in constraints])
    if np.any(vals >= 0.0):
        return np.inf
    return t * objective.value(X) - float(np.sum(np.log(-vals)))


def _newton_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    # Jacobi equilibration; variables live on very different scales
    scale = 1.0 / np.sqrt(np.maximum(np.abs(np.diag(hess)), 1e-300))
    hs = hess * scale[:, None] * scale[None, :]
    try:
        step = linalg.solve(hs, -grad * scale, assume_a="pos")
    except (linalg.LinAlgError, ValueError):
        step = linalg.lstsq(hs, -grad * scale)[0]
    return step * scale


def _center(objective, constraints, X, t, max_steps=NEWTON_MAX):
    """Damped Newton on t f0 - sum log(-f_i). Returns (X, steps, converged)."""
    for step_count in range(max_steps):
        _, g0, h0 = objective.derivatives(X)
        grad = t * g0
        hess = t * h0
        for c in constraints:
            fi, gi, hi = c.derivatives(X)
            grad += gi / (-fi)
            hess += np.outer(gi, gi) / fi ** 2 + hi / (-fi)
        dx = _newton_direction(hess, grad)
        decrement = float(-grad @ dx)
        if decrement / 2.0 <= NEWTON_TOL:
            return X, step_count, True
        phi0 = _barrier_value(objective, constraints, X, t)
        slope = float(grad @ dx)
        # near the center the barrier value is dominated by rounding
        noise = NOISE_RTOL * abs(phi0) if decrement / 2.0 <= NOISE_ZONE else 0.0
        alpha = 1.0
        while True:
            candidate = X + alpha * dx
            if _barrier_value(objective, constraints, candidate, t) <= phi0 + LS_ALPHA * alpha * slope + noise:
                break
            alpha *= LS_BETA
            if alpha < 1e-14:
                return X, step_count, decrement / 2.0 <= 1e-6
        X = candidate
    return X, max_steps, False


def _final_t(m: int, tol: float) -> float:
    t = 1.0
    while m / t >= tol:
        t *= BARRIER_MU
    return t


def _barrier_solve(objective, constraints, X0, tol, t0=1.0, stop: Optional[Callable] = None):
    """Path following from t0 until m / t < tol. Returns (X, t, newton_steps, converged)."""
    m = len(constraints)
    X, t, total = X0, t0, 0
    while True:
        X, steps, converged = _center(objective, constraints, X, t)
        total += steps
        if stop is not None and stop(X):
            return X, t, total, True
        if m / t < tol:
            return X, t, total, converged
        if total > NEWTON_TOTAL_MAX:
            return X, t, total, False
        t *= BARRIER_MU


def _strictly_feasible(objective, constraints, X) -> bool:
    return _depth(objective, constraints, X) > 0.0


def _depth(objective, constraints, X) -> float:
    """Smallest constraint slack -f_i(X); -inf outside the domain."""
    if not objective.in_domain(X) or not all(c.in_domain(X) for c in constraints):
        return -np.inf
    return min(-c.value(X) for c in constraints)


def _phase_one(objective, constraints, X0, depth: float = PHASE_ONE_DEPTH) -> Optional[np.ndarray]:
    """Minimize s subject to f_i(X) <= s, stopping once every slack reaches `depth`."""
    if not all(c.in_domain(X0) for c in constraints):
        return None
    s0 = max(c.value(X0) for c in constraints) + 1.0
    shifted: List[_Term] = [_Shifted(c) for c in constraints]
    floor = np.zeros(X0.size + 1)
    floor[-1] = -1.0
    shifted.append(_Linear(floor, -1.0))  # s >= -1
    e_last = np.zeros(X0.size + 1)
    e_last[-1] = 1.0

    def done(Xs):
        return _depth(objective, constraints, Xs[:-1]) >= depth

    Xs, _, steps, _ = _barrier_solve(_Linear(e_last), shifted, np.append(X0, s0), tol=1e-8, stop=done)
    X = Xs[:-1]
    logger.debug(f"phase one finished after {steps} Newton steps, depth={_depth(objective, constraints, X):.3e}")
    return X if _strictly_feasible(objective, constraints, X) else None


def _stationarity(objective, constraints, X, t) -> float:
    _, grad, _ = objective.derivatives(X)
    residual = grad.copy()
    for c in constraints:
        fi, gi, _ = c.derivatives(X)
        residual += gi / (-t * fi)
    return float(np.linalg.norm(residual))


# ---------------------------------------------------------------------------
# Step-3 subproblem
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConvexSubproblem:
    """Step-3 data: CCCP bounds linearized at (w_f, p_f) plus the fixed z, u, v."""
    h_tilde: np.ndarray
    g_tilde: np.ndarray
    w_f: np.ndarray
    p_f: np.ndarray
    noise_iu: float
    noise_eu: float
    eps: float
    p_t: float
    p: float
    z: float = 1.0
    u: complex = 0j
    v: float = 1.0

    @property
    def n_s(self) -> int:
        return self.h_tilde.shape[0]

    @property
    def m(self) -> int:
        return self.g_tilde.shape[0]

    def with_aux(self, z: float, u: complex, v: float) -> "ConvexSubproblem":
        return replace(self, z=z, u=u, v=v)

    def _betas(self) -> np.ndarray:
        """beta[m, k] = g_m^H (column k of [w_f, P_f])"""
        beams = np.column_stack([self.w_f, self.p_f])
        return self.g_tilde.conj() @ beams

    def sinr_bound(self, w: np.ndarray, p_mat: np.ndarray) -> np.ndarray:
        """Upper bound on each EU SINR: true numerator over linearized denominator."""
        gh = self.g_tilde.conj()
        beta = self._betas()[:, 1:]
        s = gh @ p_mat
        den = self.noise_eu - np.sum(np.abs(beta) ** 2, axis=1) + 2.0 * np.sum((beta.conj() * s).real, axis=1)
        return np.abs(gh @ w) ** 2 / den

    def eh_bound(self, w: np.ndarray, p_mat: np.ndarray) -> np.ndarray:
        """Lower bound on each EU's received power, affine in (w, P)."""
        beta = self._betas()
        s = self.g_tilde.conj() @ np.column_stack([w, p_mat])
        return -np.sum(np.abs(beta) ** 2, axis=1) + 2.0 * np.sum((beta.conj() * s).real, axis=1)

    def objective(self, w: np.ndarray, p_mat: np.ndarray, y: np.ndarray) -> float:
        hw = np.vdot(self.h_tilde, w)
        leak = float(np.sum(np.abs(self.h_tilde.conj() @ p_mat) ** 2))
        u2 = abs(self.u) ** 2
        e = u2 * (abs(hw) ** 2 + leak + self.noise_iu) + 1.0 - 2.0 * (np.conj(self.u) * hw).real
        return self.z * e + self.v / self.p * float(np.sum((1.0 + np.asarray(y)) ** self.p))

    # real form -----------------------------------------------------------

    def _terms(self) -> Tuple[_Term, List[_Term]]:
        n_s, m = self.n_s, self.m
        n_cols = m + 1
        n_x = 2 * n_s * n_cols
        root = np.sqrt(self.p_t)

        h_sel = [selector(self.h_tilde, k, n_cols) for k in range(n_cols)]
        quad = self.z * abs(self.u) ** 2 * self.p_t * sum(gram(c) for c in h_sel)
        lin = -2.0 * self.z * root * re_row(self.u * h_sel[0])
        const = self.z * (abs(self.u) ** 2 * self.noise_iu + 1.0)
        objective = _SubproblemObjective(quad, lin, const, self.v, self.p, n_x, m)

        constraints: List[_Term] = [_Ball(n_x)]
        beta = self._betas()
        for k in range(m):
            g_sel = [selector(self.g_tilde[k], col, n_cols) for col in range(n_cols)]
            leak_ref = float(np.sum(np.abs(beta[k, 1:]) ** 2))
            d0 = 1.0 - leak_ref / self.noise_eu
            d = 2.0 * root / self.noise_eu * re_row(sum(beta[k, col] * g_sel[col] for col in range(1, n_cols)))
            if d0 + d @ to_real(stack_beams(self.w_f, self.p_f)) / root <= 0.0:
                raise ValueError(f"linearized SINR denominator of EU {k} is not positive at the reference point")
            quad_k = self.p_t / self.noise_eu * gram(g_sel[0])
            constraints.append(_QuadOverAffine(quad_k, d0, d, n_x + k))
        if self.eps > 0:
            for k in range(m):
                g_sel = [selector(self.g_tilde[k], col, n_cols) for col in range(n_cols)]
                total = float(np.sum(np.abs(beta[k]) ** 2))
                row = np.zeros(n_x + m)
                row[:n_x] = -2.0 * root / self.eps * re_row(sum(beta[k, col] * g_sel[col] for col in range(n_cols)))
                constraints.append(_Linear(row, 1.0 + total / self.eps))
        return objective, constraints

    def _pack(self, w, p_mat, y) -> np.ndarray:
        return np.concatenate([to_real(stack_beams(w, p_mat)) / np.sqrt(self.p_t), np.asarray(y, dtype=float)])

    def _unpack(self, X) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        n_x = 2 * self.n_s * (self.m + 1)
        w, p_mat = unstack_beams(to_complex(X[:n_x]) * np.sqrt(self.p_t), self.n_s, self.m)
        return w, p_mat, X[n_x:].copy()


def linearize_at(eff: EffectiveChannels, w_f: np.ndarray, p_f: np.ndarray, cfg: SystemConfig) -> ConvexSubproblem:
    if cfg.p_smooth < 1.0:
        raise ValueError(f"the Step-3 subproblem is convex only for p >= 1, got {cfg.p_smooth}")
    return ConvexSubproblem(
        h_tilde=eff.h_tilde,
        g_tilde=eff.g_tilde,
        w_f=np.asarray(w_f, dtype=complex),
        p_f=np.asarray(p_f, dtype=complex),
        noise_iu=cfg.noise_iu_w,
        noise_eu=cfg.noise_eu_w,
        eps=cfg.eps_w,
        p_t=cfg.pt_w,
        p=cfg.p_smooth,
    )


def _beams_feasible(prob: ConvexSubproblem, sol: BeamformingSolution, slack: float = 1e-9) -> bool:
    if sol.power > prob.p_t * (1.0 + slack):
        return False
    return prob.eps == 0 or bool(np.all(prob.eh_bound(sol.w, sol.p_mat) >= prob.eps * (1.0 - slack)))


def solve_step3(prob: ConvexSubproblem, warm: BeamformingSolution, tol: float = 1e-7) -> Tuple[BeamformingSolution, SolverReport]:
    """Minimize the Step-3 objective over (w, P, y).

    The warm beams are kept with y raised onto the SINR bound; that lifted point is the
    fallback whenever the barrier result is no better. A barrier run that stalls is
    restarted once from a deeper phase-one point. Status "infeasible" means neither the
    warm beams nor any other point meets the power and EH rows.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    objective, constraints = prob._terms()
    n_con = len(constraints)
    bound = prob.sinr_bound(warm.w, warm.p_mat)
    fallback = warm.with_beams(warm.w, warm.p_mat, np.maximum(warm.y, bound))
    fallback_value = prob.objective(fallback.w, fallback.p_mat, fallback.y)
    fallback_ok = _beams_feasible(prob, fallback)

    # y strictly above the bound so the start can be interior in y
    X0 = prob._pack(fallback.w, fallback.p_mat, np.maximum(fallback.y, bound + Y_LIFT * (1.0 + bound)))
    t_end = _final_t(n_con, tol)

    def value_of(X) -> float:
        return prob.objective(*prob._unpack(X))

    best = None
    if _depth(objective, constraints, X0) >= START_DEPTH:
        X, steps, converged = _center(objective, constraints, X0, t_end, max_steps=WARM_NEWTON_MAX)
        if converged and value_of(X) <= fallback_value:
            best = (X, "optimal", t_end, steps)
        else:
            X, t, steps, converged = _barrier_solve(objective, constraints, X0, tol)
            best = (X, "optimal" if converged else "max-iter", t, steps)
    else:
        start = _phase_one(objective, constraints, X0)
        if start is not None:
            X, t, steps, converged = _barrier_solve(objective, constraints, start, tol)
            best = (X, "optimal" if converged else "max-iter", t, steps)

    if best is None or (best[1] != "optimal" and value_of(best[0]) >= fallback_value):
        logger.debug("Step-3 barrier run stalled, restarting from a deeper interior point")
        restart = _phase_one(objective, constraints, X0, RESTART_DEPTH)
        if restart is not None:
            X, t, steps, converged = _barrier_solve(objective, constraints, restart, tol)
            used = best[3] if best is not None else 0
            if best is None or converged or value_of(X) < value_of(best[0]):
                best = (X, "optimal" if converged else "max-iter", t, steps + used)

    if best is None:
        status = "max-iter" if fallback_ok else "infeasible"
        logger.debug(f"no strictly feasible point for the subproblem, status={status}")
        return fallback, SolverReport(status, fallback_value, np.inf, np.nan, 0)

    X, status, t, steps = best
    w, p_mat, y = prob._unpack(X)
    value = prob.objective(w, p_mat, y)
    if fallback_ok and value > fallback_value:
        logger.debug(f"barrier result {value:.10g} worse than warm start {fallback_value:.10g}, keeping warm start")
        return fallback, SolverReport(status, fallback_value, n_con / t, np.nan, steps)
    report = SolverReport(
        status=status,
        objective=value,
        gap=n_con / t,
        stationarity=_stationarity(objective, constraints, X, t),
        iterations=steps,
    )
    return warm.with_beams(w, p_mat, y), report


# ---------------------------------------------------------------------------
# Feasibility restoration
# ---------------------------------------------------------------------------

def _unit_direction(h: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(h)
    if norm == 0:
        e = np.zeros(h.shape[0], dtype=complex)
        e[0] = 1.0
        return e
    return h / norm


def matched_energy_beams(eff: EffectiveChannels, eps_w: float, margin: float = 1.0) -> np.ndarray:
    """Column m = sqrt(margin * eps) g_m / ||g_m||^2, so EU m alone receives margin * eps."""
    norms = np.sum(np.abs(eff.g_tilde) ** 2, axis=1)
    if eps_w > 0 and np.any(norms == 0):
        raise InfeasibleError("an EU has a zero effective channel")
    safe = np.where(norms > 0, norms, 1.0)
    return (np.sqrt(margin * eps_w) * eff.g_tilde / safe[:, None]).T


def _max_min_energy(eff: EffectiveChannels, cfg: SystemConfig, p_start: np.ndarray, max_rounds: int = 30):
    """CCCP on: maximize t s.t. linearized Q_m / eps - 1 >= t, ||w||^2 + ||P||^2 <= P_t."""
    n_s, m = cfg.n_s, eff.g_tilde.shape[0]
    w_f = np.zeros(n_s, dtype=complex)
    p_f = p_start * np.sqrt(1.0 - 1e-6)
    best = -np.inf
    for round_idx in range(max_rounds):
        lin = ConvexSubproblem(
            h_tilde=eff.h_tilde, g_tilde=eff.g_tilde, w_f=w_f, p_f=p_f,
            noise_iu=cfg.noise_iu_w, noise_eu=cfg.noise_eu_w, eps=cfg.eps_w, p_t=cfg.pt_w, p=1.0,
        )
        n_x = 2 * n_s * (m + 1)
        beta = lin._betas()
        root = np.sqrt(cfg.pt_w)
        constraints: List[_Term] = [_Ball(n_x)]
        for k in range(m):
            g_sel = [selector(eff.g_tilde[k], col, m + 1) for col in range(m + 1)]
            row = np.zeros(n_x + 1)
            row[:n_x] = -2.0 * root / cfg.eps_w * re_row(sum(beta[k, col] * g_sel[col] for col in range(m + 1)))
            row[-1] = 1.0
            constraints.append(_Linear(row, 1.0 + float(np.sum(np.abs(beta[k]) ** 2)) / cfg.eps_w))
        neg_t = np.zeros(n_x + 1)
        neg_t[-1] = -1.0
        objective = _Linear(neg_t)
        ratios = lin.eh_bound(w_f, p_f) / cfg.eps_w - 1.0
        X0 = np.append(to_real(stack_beams(w_f, p_f)) / root, float(np.min(ratios)) - 1.0)
        X, _, _, _ = _barrier_solve(objective, constraints, X0, tol=1e-9)
        w_f, p_f = unstack_beams(to_complex(X[:n_x]) * root, n_s, m)
        candidate = BeamformingSolution.from_beams(w_f, p_f)
        slack = float(np.min(harvested_powers(eff, candidate) / cfg.eps_w)) - 1.0
        logger.debug(f"max-min energy round {round_idx}: slack={slack:.3e}")
        if slack >= 0.0:
            return candidate, slack
        if slack <= best + 1e-9:
            break
        best = slack
    return None, best


def find_feasible(eff: EffectiveChannels, cfg: SystemConfig) -> BeamformingSolution:
    """A point meeting the power budget and all EH thresholds, or InfeasibleError."""
    p_t, eps, m = cfg.pt_w, cfg.eps_w, eff.g_tilde.shape[0]
    h_dir = _unit_direction(eff.h_tilde)
    if eps == 0:
        return BeamformingSolution.from_beams(np.sqrt(p_t) * h_dir, np.zeros((cfg.n_s, m), dtype=complex))

    p_mat = matched_energy_beams(eff, eps, ENERGY_MARGIN)
    used = float(np.sum(np.abs(p_mat) ** 2))
    if used <= p_t:
        return BeamformingSolution.from_beams(np.sqrt(p_t - used) * h_dir, p_mat)

    logger.debug(f"matched energy beams need {used:.3e} W > {p_t:.3e} W, solving max-min program")
    solution, slack = _max_min_energy(eff, cfg, p_mat * np.sqrt(p_t / used))
    if solution is None:
        raise InfeasibleError(f"EH thresholds unreachable: best min Q/eps - 1 = {slack:.3e}")
    return solution


def iu_directed_start(eff: EffectiveChannels, cfg: SystemConfig, an_share: float = AN_SHARE) -> BeamformingSolution:
    """Feasible start with w along h_tilde and every AN column in the IU's null space.

    The AN columns are matched to the EU channels projected off h_tilde, so they meet the
    EH rows without touching the IU, then scaled up to take `an_share` of the power left
    over. Falls back to find_feasible when the null space is empty or too weak.
    """
    if not 0.0 <= an_share < 1.0:
        raise ValueError(f"an_share must lie in [0, 1), got {an_share}")
    p_t, eps, m = cfg.pt_w, cfg.eps_w, eff.g_tilde.shape[0]
    base = find_feasible(eff, cfg)
    if cfg.n_s < 2 or an_share == 0.0:
        return base
    h_dir = _unit_direction(eff.h_tilde)
    null = np.eye(cfg.n_s) - np.outer(h_dir, h_dir.conj())
    g_perp = null @ eff.g_tilde.T
    norms = np.sum(np.abs(g_perp) ** 2, axis=0)
    full = np.sum(np.abs(eff.g_tilde) ** 2, axis=1)
    if np.any(norms <= NULL_FLOOR * full):
        return base

    if eps > 0:
        directions = np.sqrt(ENERGY_MARGIN * eps) * g_perp / norms
        need = float(np.sum(np.abs(directions) ** 2))
        if need >= p_t:
            return base
    else:
        directions = g_perp / np.sqrt(np.sum(norms))
        need = 0.0
    an_power = need + an_share * (p_t - need)
    p_mat = directions * np.sqrt(an_power / float(np.sum(np.abs(directions) ** 2)))
    w = np.sqrt(p_t - an_power) * h_dir
    return BeamformingSolution.from_beams(w, p_mat)
