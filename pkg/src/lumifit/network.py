"""Two-branch sine-activated MLP with hand-written forward/backward and Adam.

The network maps per-pixel rows (2 normalized coordinates, W*W context values)
to one scalar illumination residual.  Layout:

    coordinate branch:  2 -> hidden -> hidden/2      (sine, sine)
    context branch:   W*W -> hidden -> hidden/2      (sine, sine)
    head:          hidden -> hidden  -> 1            (sine, identity)

with the two branch outputs concatenated before the head.  Every sine layer
computes sin(omega * (W x + b)) with omega = 30; weights are drawn uniformly
from [-1/in_dim, 1/in_dim] for the first layer of each branch and from
[-sqrt(6/in_dim)/omega, sqrt(6/in_dim)/omega] elsewhere, so activations keep a
healthy spread through depth.  The final head layer is identity-activated so
the residual can take small signed values.

Everything here is dtype-generic: parameters created in float64 give exact
gradient checks, while the optimization loop uses float32 copies for speed.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import StaleTapeError
from .image_ops import ContextWindowSpec

DEFAULT_OMEGA = 30.0

_LAYER_NAMES = ("coord1", "coord2", "ctx1", "ctx2", "head1", "head2")


@dataclass
class DenseLayer:
    """One dense layer; ``omega`` is the sine frequency, or None for identity."""

    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    omega: float | None = DEFAULT_OMEGA

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"inconsistent layer shapes: weights {self.weights.shape}, bias {self.bias.shape}"
            )

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class MlpParameters:
    """All six layers plus a version counter used for stale-tape detection."""

    coord_branch: list[DenseLayer]
    context_branch: list[DenseLayer]
    head: list[DenseLayer]
    version: int = 0

    def __post_init__(self):
        if len(self.coord_branch) != 2 or len(self.context_branch) != 2 or len(self.head) != 2:
            raise ValueError("each branch and the head must have exactly two layers")
        cb, xb, hd = self.coord_branch, self.context_branch, self.head
        if cb[0].in_dim != 2:
            raise ValueError("coordinate branch must take 2 inputs")
        for first, second in (cb, xb, hd):
            if first.out_dim != second.in_dim:
                raise ValueError("layer widths within a branch must chain")
        if cb[1].out_dim + xb[1].out_dim != hd[0].in_dim:
            raise ValueError("concatenated branch width must equal head input width")
        if hd[1].out_dim != 1:
            raise ValueError("head must emit one scalar per row")

    def layers(self) -> list[DenseLayer]:
        """Canonical order: coord1, coord2, ctx1, ctx2, head1, head2."""
        return [*self.coord_branch, *self.context_branch, *self.head]

    @property
    def dtype(self) -> np.dtype:
        return self.coord_branch[0].weights.dtype

    def astype(self, dtype) -> "MlpParameters":
        def conv(layer: DenseLayer) -> DenseLayer:
            return DenseLayer(
                layer.weights.astype(dtype), layer.bias.astype(dtype), layer.omega
            )

        return MlpParameters(
            coord_branch=[conv(l) for l in self.coord_branch],
            context_branch=[conv(l) for l in self.context_branch],
            head=[conv(l) for l in self.head],
        )

    def finite(self) -> bool:
        return all(
            np.isfinite(l.weights).all() and np.isfinite(l.bias).all() for l in self.layers()
        )


@dataclass
class GradientBuffer:
    """d(loss)/d(parameter) arrays, congruent with MlpParameters.layers() order."""

    weight_grads: list[np.ndarray]
    bias_grads: list[np.ndarray]

    @classmethod
    def zeros_like(cls, params: MlpParameters) -> "GradientBuffer":
        layers = params.layers()
        return cls(
            weight_grads=[np.zeros_like(l.weights) for l in layers],
            bias_grads=[np.zeros_like(l.bias) for l in layers],
        )


@dataclass
class AdamState:
    """First/second moment buffers and hyperparameters for Adam."""

    m: GradientBuffer
    v: GradientBuffer
    step_count: int = 0
    lr: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params: MlpParameters, lr: float = 1e-5, **kw) -> "AdamState":
        return cls(
            m=GradientBuffer.zeros_like(params),
            v=GradientBuffer.zeros_like(params),
            lr=lr,
            **kw,
        )


@dataclass
class DesignMatrix:
    """Feature rows for full-batch optimization: one row per working pixel."""

    coords: np.ndarray  # (N, 2), in [-1, 1]
    contexts: np.ndarray  # (N, W*W), in [0, 1]

    def __post_init__(self):
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise ValueError(f"coords must be (N, 2), got {self.coords.shape}")
        if self.contexts.ndim != 2 or self.contexts.shape[0] != self.coords.shape[0]:
            raise ValueError("coords and contexts must have the same number of rows")

    @property
    def rows(self) -> int:
        return self.coords.shape[0]


def coordinate_grid(height: int, width: int, dtype=np.float64) -> np.ndarray:
    """(H*W, 2) normalized pixel coordinates, each axis mapped to [-1, 1].

    Row-major order, column 0 = row coordinate, column 1 = column coordinate.
    A singleton axis maps to 0.
    """

    def axis(n: int) -> np.ndarray:
        if n == 1:
            return np.zeros(1, dtype=np.float64)
        return 2.0 * np.arange(n) / (n - 1) - 1.0

    gy, gx = np.meshgrid(axis(height), axis(width), indexing="ij")
    return np.stack([gy.ravel(), gx.ravel()], axis=1).astype(dtype)


def build_design_matrix(
    plane: np.ndarray, window: ContextWindowSpec, dtype=np.float64
) -> DesignMatrix:
    """Assemble coordinates and reflect-padded context windows for a value plane."""
    from .image_ops import extract_context

    h, w = plane.shape
    return DesignMatrix(
        coords=coordinate_grid(h, w, dtype=dtype),
        contexts=extract_context(plane, window).astype(dtype),
    )


def init_parameters(
    window: ContextWindowSpec, seed: int, hidden: int = 256, dtype=np.float64
) -> MlpParameters:
    """Deterministically initialize the six layers for a given context window.

    ``hidden`` controls every width: branches go in -> hidden -> hidden//2 and
    the head goes hidden -> hidden -> 1, so ``hidden=8`` yields the reduced
    2 -> 8 -> 4 test network.
    """
    if hidden < 2 or hidden % 2:
        raise ValueError(f"hidden width must be even and >= 2, got {hidden}")
    rng = np.random.default_rng(seed)
    half = hidden // 2
    win2 = window.side * window.side

    def make(in_dim: int, out_dim: int, first: bool, omega: float | None) -> DenseLayer:
        bound = 1.0 / in_dim if first else np.sqrt(6.0 / in_dim) / DEFAULT_OMEGA
        w = rng.uniform(-bound, bound, size=(out_dim, in_dim)).astype(dtype)
        b = rng.uniform(-bound, bound, size=out_dim).astype(dtype)
        return DenseLayer(w, b, omega)

    return MlpParameters(
        coord_branch=[
            make(2, hidden, True, DEFAULT_OMEGA),
            make(hidden, half, False, DEFAULT_OMEGA),
        ],
        context_branch=[
            make(win2, hidden, True, DEFAULT_OMEGA),
            make(hidden, half, False, DEFAULT_OMEGA),
        ],
        head=[
            make(hidden, hidden, False, DEFAULT_OMEGA),
            make(hidden, 1, False, None),
        ],
    )


class Tape:
    """Cached forward-pass state for one backward pass.

    Stores, per layer, the layer input and the scaled pre-activation
    (omega * (W x + b); raw pre-activation for identity layers).  A tape is
    tied to the parameter version it was computed with and is consumed by
    ``backward``; reusing it afterwards raises :class:`StaleTapeError`.
    Buffers are recycled across epochs when the same tape object is passed
    back into ``forward``.
    """

    def __init__(self):
        self.inputs: list[np.ndarray | None] = [None] * 6
        self.spreacts: list[np.ndarray | None] = [None] * 6
        self.activations: list[np.ndarray | None] = [None] * 6
        self.cat: np.ndarray | None = None
        self.params_version: int = -1
        self.consumed: bool = True
        self._dp1: np.ndarray | None = None
        self._dp2: np.ndarray | None = None

    def _buffer(self, store: list, idx: int, shape: tuple, dtype) -> np.ndarray:
        buf = store[idx]
        if buf is None or buf.shape != shape or buf.dtype != dtype:
            buf = np.empty(shape, dtype=dtype)
            store[idx] = buf
        return buf


def forward(
    params: MlpParameters,
    batch: DesignMatrix,
    tape: Tape | None = None,
) -> tuple[np.ndarray, Tape]:
    """Evaluate the network on every row of the design matrix.

    Returns the (N,) residual vector and a tape for ``backward``.  Passing a
    previously used tape recycles its buffers (the tape is revalidated for the
    current parameter version).
    """
    layers = params.layers()
    if batch.contexts.shape[1] != layers[2].in_dim:
        raise ValueError(
            f"context width {batch.contexts.shape[1]} does not match "
            f"network input {layers[2].in_dim}"
        )
    dtype = params.dtype
    n = batch.rows
    coords = np.ascontiguousarray(batch.coords, dtype=dtype)
    contexts = np.ascontiguousarray(batch.contexts, dtype=dtype)
    if tape is None:
        tape = Tape()

    half = params.coord_branch[1].out_dim
    cat_width = layers[4].in_dim
    if tape.cat is None or tape.cat.shape != (n, cat_width) or tape.cat.dtype != dtype:
        tape.cat = np.empty((n, cat_width), dtype=dtype)

    def dense(idx: int, x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        layer = layers[idx]
        s = tape._buffer(tape.spreacts, idx, (n, layer.out_dim), dtype)
        tape.inputs[idx] = x
        if layer.omega is None:
            np.matmul(x, layer.weights.T, out=s)
            s += layer.bias
            tape.activations[idx] = s
            return s
        # Fold omega into the (small) weights so the (n, out) pre-activation
        # array never needs a separate scaling pass.
        np.matmul(x, (layer.omega * layer.weights).T, out=s)
        s += layer.omega * layer.bias
        if out is None:
            out = tape._buffer(tape.activations, idx, (n, layer.out_dim), dtype)
        else:
            tape.activations[idx] = out
        np.sin(s, out=out)
        return out

    a_coord = dense(1, dense(0, coords), out=tape.cat[:, :half])
    dense(3, dense(2, contexts), out=tape.cat[:, half:])
    out = dense(5, dense(4, tape.cat))

    tape.params_version = params.version
    tape.consumed = False
    return out[:, 0], tape


def backward(
    params: MlpParameters,
    tape: Tape,
    residual_grads: np.ndarray,
    out: GradientBuffer | None = None,
) -> GradientBuffer:
    """Exact gradients of sum(residual_grads * residuals) w.r.t. every parameter.

    Consumes the tape (its cached pre-activations are overwritten in place);
    call ``forward`` again before the next backward pass.
    """
    if tape.consumed:
        raise StaleTapeError("tape already consumed by a previous backward pass")
    if tape.params_version != params.version:
        raise StaleTapeError(
            f"tape was recorded at parameter version {tape.params_version}, "
            f"parameters are now at {params.version}"
        )
    layers = params.layers()
    n = tape.inputs[5].shape[0]
    residual_grads = np.asarray(residual_grads)
    if residual_grads.shape != (n,):
        raise ValueError(f"residual_grads must have shape ({n},)")
    dtype = params.dtype
    if out is None:
        out = GradientBuffer.zeros_like(params)

    def back(idx: int, d: np.ndarray, want_dprev: bool, dprev_buf: np.ndarray | None):
        layer = layers[idx]
        om = layer.omega
        if om is None:
            dz = d
        else:
            # d/dz sin(omega z) = omega cos(omega z); s already holds omega*z.
            # The omega factor is applied to the small per-layer outputs below
            # rather than across all n rows.
            s = tape.spreacts[idx]
            np.cos(s, out=s)
            s *= d
            dz = s
        np.matmul(dz.T, tape.inputs[idx], out=out.weight_grads[idx])
        np.sum(dz, axis=0, out=out.bias_grads[idx])
        if om is not None:
            out.weight_grads[idx] *= om
            out.bias_grads[idx] *= om
        if not want_dprev:
            return None
        if dprev_buf is None or dprev_buf.shape != (n, layer.in_dim) or dprev_buf.dtype != dtype:
            dprev_buf = np.empty((n, layer.in_dim), dtype=dtype)
        w = layer.weights if om is None else om * layer.weights
        return np.matmul(dz, w, out=dprev_buf)

    d_head2 = residual_grads.reshape(n, 1).astype(dtype, copy=False)
    tape._dp1 = back(5, d_head2, True, tape._dp1)
    tape._dp2 = back(4, tape._dp1, True, tape._dp2)
    half = params.coord_branch[1].out_dim
    tape._dp1 = back(1, tape._dp2[:, :half], True, tape._dp1)
    back(0, tape._dp1, False, None)
    tape._dp1 = back(3, tape._dp2[:, half:], True, tape._dp1)
    back(2, tape._dp1, False, None)

    tape.consumed = True
    return out


def adam_step(params: MlpParameters, grads: GradientBuffer, state: AdamState) -> None:
    """One bias-corrected Adam update, in place.

    m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
    theta <- theta - lr * mhat / (sqrt(vhat) + eps).
    Increments ``state.step_count`` and ``params.version``.
    """
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    layers = params.layers()
    for i, layer in enumerate(layers):
        for theta, m, v, g in (
            (layer.weights, state.m.weight_grads[i], state.v.weight_grads[i], grads.weight_grads[i]),
            (layer.bias, state.m.bias_grads[i], state.v.bias_grads[i], grads.bias_grads[i]),
        ):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * np.square(g)
            theta -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    params.version += 1


def save_parameters(params: MlpParameters, path) -> None:
    """Write a snapshot: one JSON header line, then the raw little-endian
    float64 stream of every layer's weights and bias in canonical order."""
    header = {
        "format": "lumifit-mlp-v1",
        "layers": [
            {
                "name": name,
                "in": layer.in_dim,
                "out": layer.out_dim,
                "omega": layer.omega,
            }
            for name, layer in zip(_LAYER_NAMES, params.layers())
        ],
    }
    buf = io.BytesIO()
    buf.write(json.dumps(header).encode("utf-8"))
    buf.write(b"\n")
    for layer in params.layers():
        buf.write(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        buf.write(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_parameters(path) -> MlpParameters:
    """Inverse of :func:`save_parameters`; always yields float64 parameters."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        header = json.loads(header_line.decode("utf-8"))
        if header.get("format") != "lumifit-mlp-v1":
            raise ValueError("unrecognized parameter snapshot header")
        layers = []
        for entry in header["layers"]:
            in_dim, out_dim = int(entry["in"]), int(entry["out"])
            w = np.frombuffer(fh.read(8 * in_dim * out_dim), dtype="<f8").reshape(
                out_dim, in_dim
            )
            b = np.frombuffer(fh.read(8 * out_dim), dtype="<f8")
            omega = entry["omega"]
            layers.append(DenseLayer(w.copy(), b.copy(), None if omega is None else float(omega)))
    return MlpParameters(
        coord_branch=layers[0:2], context_branch=layers[2:4], head=layers[4:6]
    )
