"""From-scratch differentiable models: the simple CNN and a two-layer MLP.

All arithmetic is float64 and parameters live in one flat vector with
named slices, so analytic gradients can be checked against central
finite differences to tight tolerances.

The CNN is layer-norm (per-sample, learned elementwise affine), a valid
2-D convolution whose kernel spans all channels, a global average pool
over time, and a two-layer head with a sigmoid between the linear maps.
Because the pool is a global mean, conv followed by pool equals a dot
product between the kernel and sliding-window means of the input; the
forward/backward passes use that regrouping (same arithmetic, far
cheaper than materializing the convolution).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

LN_EPS = 1e-8


@dataclass(frozen=True)
class SimpleCnnConfig:
    in_channels: int
    in_timepoints: int
    n_outputs: int
    kernel_width: int
    conv_filters: int = 100
    hidden_units: int = 64

    def __post_init__(self):
        if min(self.in_channels, self.in_timepoints, self.n_outputs) < 1:
            raise ConfigError("channels, timepoints, and outputs must be >= 1")
        if not 1 <= self.kernel_width <= self.in_timepoints:
            raise ConfigError(
                f"kernel width {self.kernel_width} must lie in 1..{self.in_timepoints}"
            )
        if self.conv_filters < 1 or self.hidden_units < 1:
            raise ConfigError("conv_filters and hidden_units must be >= 1")

    @classmethod
    def for_samples(
        cls, channels: int, timepoints: int, fs: float, n_outputs: int, **kwargs
    ) -> "SimpleCnnConfig":
        """Kernel width = 100 ms of samples, clipped to the sample length."""
        width = int(round(0.1 * fs))
        width = max(1, min(width, timepoints))
        return cls(
            in_channels=channels,
            in_timepoints=timepoints,
            n_outputs=n_outputs,
            kernel_width=width,
            **kwargs,
        )


class ParamLayout:
    """Named float64 slices inside one flat parameter vector."""

    def __init__(self, shapes: list[tuple[str, tuple[int, ...]]]):
        self.shapes = dict(shapes)
        self.slices = {}
        offset = 0
        for name, shape in shapes:
            size = int(np.prod(shape))
            self.slices[name] = slice(offset, offset + size)
            offset += size
        self.n_params = offset

    def view(self, params: np.ndarray, name: str) -> np.ndarray:
        return params[self.slices[name]].reshape(self.shapes[name])

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n_params, dtype=np.float64)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _check_batch(x: np.ndarray, channels: int, timepoints: int) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[1] != channels or x.shape[2] != timepoints:
        raise ConfigError(
            f"batch shape {x.shape} does not match [n x {channels} x {timepoints}]"
        )
    return x.astype(np.float64, copy=False)


class SimpleCnn:
    """Layer-norm -> full-height conv -> global mean pool -> FC-sigmoid-FC."""

    def __init__(self, config: SimpleCnnConfig):
        self.config = config
        c = config
        self.out_positions = c.in_timepoints - c.kernel_width + 1
        self.layout = ParamLayout(
            [
                ("ln_gain", (c.in_channels, c.in_timepoints)),
                ("ln_bias", (c.in_channels, c.in_timepoints)),
                ("conv_w", (c.conv_filters, c.in_channels, c.kernel_width)),
                ("conv_b", (c.conv_filters,)),
                ("fc1_w", (c.hidden_units, c.conv_filters)),
                ("fc1_b", (c.hidden_units,)),
                ("fc2_w", (c.n_outputs, c.hidden_units)),
                ("fc2_b", (c.n_outputs,)),
            ]
        )

    @property
    def n_params(self) -> int:
        return self.layout.n_params

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        c = self.config
        p = self.layout.zeros()
        self.layout.view(p, "ln_gain")[:] = 1.0
        self.layout.view(p, "conv_w")[:] = rng.normal(
            0.0, 1.0 / np.sqrt(c.in_channels * c.kernel_width),
            size=(c.conv_filters, c.in_channels, c.kernel_width),
        )
        self.layout.view(p, "fc1_w")[:] = rng.normal(
            0.0, 1.0 / np.sqrt(c.conv_filters), size=(c.hidden_units, c.conv_filters)
        )
        self.layout.view(p, "fc2_w")[:] = rng.normal(
            0.0, 1.0 / np.sqrt(c.hidden_units), size=(c.n_outputs, c.hidden_units)
        )
        return p

    def _layer_norm(self, x: np.ndarray) -> np.ndarray:
        flat = x.reshape(x.shape[0], -1)
        mu = flat.mean(axis=1)[:, None, None]
        var = flat.var(axis=1)[:, None, None]
        return (x - mu) / np.sqrt(var + LN_EPS)

    def _window_means(self, u: np.ndarray) -> np.ndarray:
        """Sliding means m[i,c,k] = mean_t u[i,c,t+k] over the valid
        positions t in [0, out_positions)."""
        to = self.out_positions
        k = self.config.kernel_width
        cs = np.cumsum(u, axis=-1)
        total = np.empty(u.shape[:-1] + (k,), dtype=np.float64)
        total[...] = cs[..., to - 1 : to - 1 + k]
        total[..., 1:] -= cs[..., : k - 1]
        return total / to

    def forward(self, params: np.ndarray, x: np.ndarray, want_state: bool = False):
        """Return (logits [n, n_outputs], pooled [n, conv_filters], state).

        *pooled* is the global-average-pooled convolution output, the
        feature representation downstream tasks reuse.
        """
        c = self.config
        x = _check_batch(x, c.in_channels, c.in_timepoints)
        L = self.layout
        xhat = self._layer_norm(x)
        u = L.view(params, "ln_gain")[None] * xhat + L.view(params, "ln_bias")[None]
        ubar = self._window_means(u)
        n = x.shape[0]
        flat = ubar.reshape(n, -1)
        w2d = L.view(params, "conv_w").reshape(c.conv_filters, -1)
        pooled = flat @ w2d.T + L.view(params, "conv_b")[None]
        pre1 = pooled @ L.view(params, "fc1_w").T + L.view(params, "fc1_b")[None]
        hidden = sigmoid(pre1)
        logits = hidden @ L.view(params, "fc2_w").T + L.view(params, "fc2_b")[None]
        state = None
        if want_state:
            state = {"xhat": xhat, "ubar_flat": flat, "pooled": pooled, "hidden": hidden}
        return logits, pooled, state

    def backward(self, params: np.ndarray, state: dict, dlogits: np.ndarray) -> np.ndarray:
        """Exact gradient of the scalar loss wrt every parameter, given
        dlogits = dLoss/dlogits for the forward pass that produced *state*."""
        c = self.config
        L = self.layout
        grads = self.layout.zeros()
        hidden = state["hidden"]
        L.view(grads, "fc2_w")[:] = dlogits.T @ hidden
        L.view(grads, "fc2_b")[:] = dlogits.sum(axis=0)
        dhidden = dlogits @ L.view(params, "fc2_w")
        dpre1 = dhidden * hidden * (1.0 - hidden)
        L.view(grads, "fc1_w")[:] = dpre1.T @ state["pooled"]
        L.view(grads, "fc1_b")[:] = dpre1.sum(axis=0)
        dpooled = dpre1 @ L.view(params, "fc1_w")
        L.view(grads, "conv_b")[:] = dpooled.sum(axis=0)
        flat = state["ubar_flat"]
        L.view(grads, "conv_w")[:] = (dpooled.T @ flat).reshape(
            c.conv_filters, c.in_channels, c.kernel_width
        )
        # back through the window means into the layer-norm affine params
        w2d = L.view(params, "conv_w").reshape(c.conv_filters, -1)
        dubar = (dpooled @ w2d).reshape(-1, c.in_channels, c.kernel_width)
        du = self._spread_window_grad(dubar)
        xhat = state["xhat"]
        L.view(grads, "ln_gain")[:] = np.einsum("nct,nct->ct", du, xhat)
        L.view(grads, "ln_bias")[:] = du.sum(axis=0)
        return grads

    def _spread_window_grad(self, dubar: np.ndarray) -> np.ndarray:
        """Adjoint of the sliding means: du[i,c,tau] =
        (1/out_positions) * sum_{k valid at tau} dubar[i,c,k]."""
        to = self.out_positions
        k = self.config.kernel_width
        t_dim = self.config.in_timepoints
        csum = np.cumsum(dubar, axis=-1)
        taus = np.arange(t_dim)
        hi = np.minimum(k - 1, taus)
        lo = np.maximum(0, taus - to + 1)
        du = csum[..., hi]
        has_lo = lo > 0
        du[..., has_lo] -= csum[..., lo[has_lo] - 1]
        return du / to


@dataclass(frozen=True)
class Mlp2Config:
    in_features: int
    n_outputs: int
    hidden_units: int = 64

    def __post_init__(self):
        if min(self.in_features, self.n_outputs, self.hidden_units) < 1:
            raise ConfigError("mlp dimensions must be >= 1")


class Mlp2:
    """Two linear layers with a sigmoid in between."""

    def __init__(self, config: Mlp2Config):
        self.config = config
        c = config
        self.layout = ParamLayout(
            [
                ("fc1_w", (c.hidden_units, c.in_features)),
                ("fc1_b", (c.hidden_units,)),
                ("fc2_w", (c.n_outputs, c.hidden_units)),
                ("fc2_b", (c.n_outputs,)),
            ]
        )

    @property
    def n_params(self) -> int:
        return self.layout.n_params

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        c = self.config
        p = self.layout.zeros()
        self.layout.view(p, "fc1_w")[:] = rng.normal(
            0.0, 1.0 / np.sqrt(c.in_features), size=(c.hidden_units, c.in_features)
        )
        self.layout.view(p, "fc2_w")[:] = rng.normal(
            0.0, 1.0 / np.sqrt(c.hidden_units), size=(c.n_outputs, c.hidden_units)
        )
        return p

    def forward(self, params: np.ndarray, x: np.ndarray, want_state: bool = False):
        c = self.config
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None]
        if x.shape[1] != c.in_features:
            raise ConfigError(f"feature batch shape {x.shape} != [n x {c.in_features}]")
        L = self.layout
        pre1 = x @ L.view(params, "fc1_w").T + L.view(params, "fc1_b")[None]
        hidden = sigmoid(pre1)
        logits = hidden @ L.view(params, "fc2_w").T + L.view(params, "fc2_b")[None]
        state = {"x": x, "hidden": hidden} if want_state else None
        return logits, hidden, state

    def backward(self, params: np.ndarray, state: dict, dlogits: np.ndarray) -> np.ndarray:
        L = self.layout
        grads = self.layout.zeros()
        hidden = state["hidden"]
        L.view(grads, "fc2_w")[:] = dlogits.T @ hidden
        L.view(grads, "fc2_b")[:] = dlogits.sum(axis=0)
        dhidden = dlogits @ L.view(params, "fc2_w")
        dpre1 = dhidden * hidden * (1.0 - hidden)
        L.view(grads, "fc1_w")[:] = dpre1.T @ state["x"]
        L.view(grads, "fc1_b")[:] = dpre1.sum(axis=0)
        return grads
