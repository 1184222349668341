from dataclasses import dataclass, field

import numpy as np

CERTIFIED = "certified"
MAX_ITERS = "max_iters"
STALLED = "stalled"


@dataclass
class SolverParams:
    """Step sizes, tolerances and iteration controls shared by the decoders.

    ``sigma``/``tau_step`` default to ``0.99 / ||A||_{2->2}`` and ``step``
    (the NNLS gradient step) to ``0.99 / ||A||^2``. ``eps1`` defaults to
    ``1e-9 * max(1, ||y||_1)``. With ``certify=False`` a solver ignores its
    stopping test and runs exactly ``max_iters`` iterations.
    """

    sigma: float | None = None
    tau_step: float | None = None
    eps1: float | None = None
    eps2: float = 1e-9
    max_iters: int = 20_000
    track_averages: bool = False
    trace_every: int = 0
    trace_iters: tuple = ()
    keep_iterates: bool = False
    certify: bool = True
    step: float | None = None
    alpha: float = 3.01

    def resolved_eps1(self, y):
        if self.eps1 is not None:
            if self.eps1 < 0:
                raise ValueError("eps1 must be >= 0")
            return float(self.eps1)
        return 1e-9 * max(1.0, float(np.abs(y).sum()))

    def trace_points(self):
        """Sorted iteration numbers in ``[1, max_iters]`` to record."""
        pts = {int(k) for k in self.trace_iters if 1 <= k <= self.max_iters}
        if self.trace_every > 0:
            pts.update(range(self.trace_every, self.max_iters + 1, self.trace_every))
        return sorted(pts)

    @property
    def tracing(self):
        return self.trace_every > 0 or len(self.trace_iters) > 0


@dataclass
class TraceSample:
    iter: int
    objective: float
    gap: float
    dual_infeas: float
    x_min: float
    w_absmax: float = float("nan")
    avg_objective: float = float("nan")
    elapsed: float = 0.0
    iterate: np.ndarray | None = None
    avg_iterate: np.ndarray | None = None


@dataclass
class SolveResult:
    """Outcome of one decoder run.

    ``status`` is ``"certified"`` when the solver's own stopping test fired
    (for NNLAD: gap <= eps1 and dual infeasibility <= eps2),
    ``"max_iters"`` when the budget ran out, ``"stalled"`` on NaN or an
    undefined step. ``matvecs``/``rmatvecs`` count products by ``A`` and
    ``A.T`` including any made during setup.
    """

    estimate: np.ndarray
    iterations: int
    status: str
    objective: float
    dual: np.ndarray | None = None
    gap: float = float("nan")
    dual_infeasibility: float = float("nan")
    trace: list = field(default_factory=list)
    averages_estimate: np.ndarray | None = None
    averages_dual: np.ndarray | None = None
    matvecs: int = 0
    rmatvecs: int = 0
    images: dict = field(default_factory=dict)
    setup_matvecs: int = 0
    setup_rmatvecs: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def certified(self):
        return self.status == CERTIFIED
