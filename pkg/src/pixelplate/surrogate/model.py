"""Residual convolutional regressor, written directly on numpy.

The network maps one 43x43 plate bitmap to a normalized (frequency, |S21|)
pair: a 3x3 stem convolution, four stages of residual blocks (stages 2-4 open
with a stride-2 convolution and a 1x1 stride-2 projection shortcut), global
average pooling, then a 64-wide hidden layer and a 2-wide linear output. With
the default two blocks per stage that is 1 + 16 + 2 = 19 weighted layers.

Gradients are computed by hand-rolled reverse-mode passes per layer; every
tensor is float64 so training and inference are bit-reproducible for a fixed
seed. Convolutions run as tensordot contractions over sliding windows, which
lowers to BLAS.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigError, ModelError
from ..geometry import PLATE_SIZE, PlateMatrix
from ..sparams import ResonancePoint

# Batches are processed in fixed-size chunks to bound the im2col workspace;
# the chunk size is a constant so gradient sums are reproducible.
_BATCH_CHUNK = 16

ENCODINGS = ("zero_one", "plus_minus_one")


@dataclass(frozen=True)
class SurrogateConfig:
    """Architecture knobs. The desk-scale default trains on a single CPU core."""

    stem_channels: int = 8
    stage_channels: tuple[int, int, int, int] = (8, 16, 32, 64)
    blocks_per_stage: int = 2
    head_hidden: int = 64
    outputs: int = 2
    input_encoding: str = "plus_minus_one"

    def __post_init__(self):
        object.__setattr__(self, "stage_channels", tuple(int(c) for c in self.stage_channels))
        if len(self.stage_channels) != 4:
            raise ConfigError("stage_channels must list exactly 4 widths")
        counts = (self.stem_channels, *self.stage_channels, self.blocks_per_stage, self.head_hidden)
        if any(c < 1 for c in counts):
            raise ConfigError("all channel/block counts must be positive")
        if self.outputs != 2:
            raise ConfigError("the regressor predicts exactly 2 targets")
        if self.input_encoding not in ENCODINGS:
            raise ConfigError(f"input_encoding must be one of {ENCODINGS}")

    @classmethod
    def paper_preset(cls) -> "SurrogateConfig":
        """Full-scale widths (512 final feature maps) for offline training."""
        return cls(stem_channels=64, stage_channels=(64, 128, 256, 512))

    def depth(self) -> int:
        """Weighted-layer count: stem + block convolutions + fully-connected."""
        return 1 + 4 * self.blocks_per_stage * 2 + 2


@dataclass(frozen=True)
class TargetNormalizer:
    """Linear map between physical labels and the [0, 1] training range."""

    f_min: float = 1.0
    f_max: float = 5.0
    s_min: float = -15.0
    s_max: float = -2.0

    def __post_init__(self):
        if not (self.f_min < self.f_max and self.s_min < self.s_max):
            raise ConfigError("normalizer ranges must satisfy min < max")

    def normalize(self, f_ghz: float, s21_db: float) -> tuple[float, float]:
        return (
            (f_ghz - self.f_min) / (self.f_max - self.f_min),
            (s21_db - self.s_min) / (self.s_max - self.s_min),
        )

    def denormalize(self, f_norm: float, s_norm: float) -> tuple[float, float]:
        """Inverse map with clamping into the physical ranges."""
        f_norm = min(max(f_norm, 0.0), 1.0)
        s_norm = min(max(s_norm, 0.0), 1.0)
        return (
            self.f_min + f_norm * (self.f_max - self.f_min),
            self.s_min + s_norm * (self.s_max - self.s_min),
        )


@dataclass(frozen=True)
class _ConvSpec:
    """One convolution in the execution plan."""

    name: str
    in_ch: int
    out_ch: int
    ksize: int
    stride: int
    pad: int


@dataclass(frozen=True)
class _BlockSpec:
    conv1: _ConvSpec
    conv2: _ConvSpec
    proj: _ConvSpec | None  # 1x1 shortcut when stride or width changes


def _plan_blocks(config: SurrogateConfig) -> list[_BlockSpec]:
    blocks = []
    in_ch = config.stem_channels
    for s, out_ch in enumerate(config.stage_channels, start=1):
        for b in range(1, config.blocks_per_stage + 1):
            stride = 2 if (s > 1 and b == 1) else 1
            prefix = f"stage{s}.block{b}"
            conv1 = _ConvSpec(f"{prefix}.conv1.kernel", in_ch, out_ch, 3, stride, 1)
            conv2 = _ConvSpec(f"{prefix}.conv2.kernel", out_ch, out_ch, 3, 1, 1)
            proj = None
            if stride != 1 or in_ch != out_ch:
                proj = _ConvSpec(f"{prefix}.proj.kernel", in_ch, out_ch, 1, stride, 0)
            blocks.append(_BlockSpec(conv1, conv2, proj))
            in_ch = out_ch
    return blocks


def manifest_shapes(config: SurrogateConfig) -> dict[str, tuple[int, ...]]:
    """Ordered name -> shape map for every weight tensor."""
    shapes: dict[str, tuple[int, ...]] = {
        "stem.kernel": (config.stem_channels, 1, 3, 3),
    }
    for block in _plan_blocks(config):
        for spec in (block.conv1, block.conv2, block.proj):
            if spec is not None:
                shapes[spec.name] = (spec.out_ch, spec.in_ch, spec.ksize, spec.ksize)
    feat = config.stage_channels[-1]
    shapes["head.fc1.weight"] = (config.head_hidden, feat)
    shapes["head.fc1.bias"] = (config.head_hidden,)
    shapes["head.fc2.weight"] = (config.outputs, config.head_hidden)
    shapes["head.fc2.bias"] = (config.outputs,)
    return shapes


def spatial_sizes(config: SurrogateConfig) -> list[int]:
    """Feature-map side length at the input and after each stage (43, 43, 22, 11, 6)."""
    sizes = [PLATE_SIZE]
    size = PLATE_SIZE
    for s in range(1, 5):
        if s > 1:
            size = (size + 2 * 1 - 3) // 2 + 1
        sizes.append(size)
    return sizes


@dataclass(eq=False)
class ModelWeights:
    """Named weight tensors plus the architecture they instantiate."""

    config: SurrogateConfig
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        expected = manifest_shapes(self.config)
        if list(self.tensors.keys()) != list(expected.keys()):
            raise ModelError(
                f"tensor manifest mismatch: expected {list(expected)}, got {list(self.tensors)}"
            )
        for name, shape in expected.items():
            arr = self.tensors[name]
            if arr.shape != shape:
                raise ModelError(f"tensor {name}: expected shape {shape}, got {arr.shape}")
            if arr.dtype != np.float64:
                raise ModelError(f"tensor {name}: expected float64, got {arr.dtype}")
            if not np.isfinite(arr).all():
                raise ModelError(f"tensor {name}: contains non-finite values")

    def copy(self) -> "ModelWeights":
        return ModelWeights(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        """A gradient/velocity buffer with the same manifest, all zero."""
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}

    def parameter_count(self) -> int:
        return sum(v.size for v in self.tensors.values())


def build_model(config: SurrogateConfig, seed: int) -> ModelWeights:
    """He-initialized weights (std sqrt(2 / fan_in), zero biases), seed-deterministic."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in manifest_shapes(config).items():
        if name.endswith(".bias"):
            tensors[name] = np.zeros(shape, dtype=np.float64)
        else:
            fan_in = int(np.prod(shape[1:]))
            std = np.sqrt(2.0 / fan_in)
            tensors[name] = rng.normal(0.0, std, size=shape)
    return ModelWeights(config, tensors)


# ---------------------------------------------------------------------------
# layer primitives
#
# Convolutions run as im2col + one GEMM. The column matrix built in the
# forward pass is kept in the cache: the kernel gradient is then a single
# matrix product against it, and only the input gradient needs a col2im
# scatter back over the k*k offsets.


@dataclass(eq=False)
class _ConvCache:
    cols: np.ndarray  # (N*Ho*Wo, C*k*k)
    in_shape: tuple[int, int, int, int]
    out_hw: tuple[int, int]


def _im2col(x: np.ndarray, k: int, stride: int, pad: int) -> tuple[np.ndarray, tuple[int, int]]:
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(x, (k, k), axis=(2, 3))[:, :, ::stride, ::stride]
    n, c, ho, wo = windows.shape[:4]
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, c * k * k)
    return cols, (ho, wo)


def _conv_forward(
    x: np.ndarray, kernel: np.ndarray, stride: int, pad: int, keep_cache: bool = False
) -> tuple[np.ndarray, _ConvCache | None]:
    """x: (N, C, H, W), kernel: (O, C, k, k) -> (N, O, Ho, Wo)."""
    o, c, k, _ = kernel.shape
    cols, (ho, wo) = _im2col(x, k, stride, pad)
    out = cols @ kernel.reshape(o, c * k * k).T
    out = np.ascontiguousarray(out.reshape(x.shape[0], ho, wo, o).transpose(0, 3, 1, 2))
    cache = _ConvCache(cols, x.shape, (ho, wo)) if keep_cache else None
    return out, cache


def _conv_backward_kernel(cache: _ConvCache, kernel_shape, gout: np.ndarray) -> np.ndarray:
    o, c, k, _ = kernel_shape
    gout_mat = gout.transpose(0, 2, 3, 1).reshape(-1, o)
    return (gout_mat.T @ cache.cols).reshape(o, c, k, k)


def _conv_backward_input(
    cache: _ConvCache, kernel: np.ndarray, stride: int, pad: int, gout: np.ndarray
) -> np.ndarray:
    o, c, k, _ = kernel.shape
    n, _, h, w = cache.in_shape
    ho, wo = cache.out_hw
    if stride == 1:
        # input gradient is a same-size correlation with the flipped, transposed kernel
        flipped = np.ascontiguousarray(kernel.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1])
        gx, _ = _conv_forward(gout, flipped, 1, k - 1 - pad)
        return gx
    gout_mat = gout.transpose(0, 2, 3, 1).reshape(-1, o)
    gcols = gout_mat @ kernel.reshape(o, c * k * k)
    g6 = gcols.reshape(n, ho, wo, c, k, k).transpose(0, 3, 1, 2, 4, 5)
    gxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=np.float64)
    for u in range(k):
        for v in range(k):
            gxp[:, :, u : u + stride * ho : stride, v : v + stride * wo : stride] += g6[
                :, :, :, :, u, v
            ]
    return gxp[:, :, pad : pad + h, pad : pad + w] if pad else gxp


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


# ---------------------------------------------------------------------------
# whole-network forward / backward


def encode_plates(bits: np.ndarray, encoding: str) -> np.ndarray:
    """(N, 43, 43) {0,1} grids -> (N, 1, 43, 43) float64 network input."""
    x = np.asarray(bits, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    if x.shape[-2:] != (PLATE_SIZE, PLATE_SIZE):
        raise ModelError(f"expected {PLATE_SIZE}x{PLATE_SIZE} plates, got {x.shape}")
    if encoding == "plus_minus_one":
        x = 2.0 * x - 1.0
    return x[:, None, :, :]


def _forward_batch(model: ModelWeights, x: np.ndarray, keep_cache: bool = False):
    """Run the network on encoded input (N, 1, 43, 43); optionally keep caches."""
    config = model.config
    tensors = model.tensors
    cache: dict | None = {"blocks": []} if keep_cache else None

    stem_pre, stem_cache = _conv_forward(x, tensors["stem.kernel"], 1, 1, keep_cache)
    h = _relu(stem_pre)
    if keep_cache:
        cache["stem"] = stem_cache
        cache["stem_out"] = h

    for block in _plan_blocks(config):
        block_in = h
        h1, c1 = _conv_forward(
            block_in, tensors[block.conv1.name], block.conv1.stride, block.conv1.pad, keep_cache
        )
        r1 = _relu(h1)
        h2, c2 = _conv_forward(r1, tensors[block.conv2.name], 1, 1, keep_cache)
        if block.proj is not None:
            shortcut, cp = _conv_forward(
                block_in, tensors[block.proj.name], block.proj.stride, 0, keep_cache
            )
        else:
            shortcut, cp = block_in, None
        h = _relu(h2 + shortcut)
        if keep_cache:
            cache["blocks"].append((block, c1, r1, c2, cp, h))

    pooled = h.mean(axis=(2, 3))  # (N, feat)
    fc1_pre = pooled @ tensors["head.fc1.weight"].T + tensors["head.fc1.bias"]
    fc1 = _relu(fc1_pre)
    out = fc1 @ tensors["head.fc2.weight"].T + tensors["head.fc2.bias"]
    if keep_cache:
        cache["pool_shape"] = h.shape
        cache["pooled"] = pooled
        cache["fc1"] = fc1
    return out, cache


def _backward_batch(model: ModelWeights, cache: dict, gout: np.ndarray) -> dict[str, np.ndarray]:
    """Reverse-mode pass; returns gradients keyed like the weight manifest."""
    tensors = model.tensors
    grads: dict[str, np.ndarray] = {}

    fc1 = cache["fc1"]
    pooled = cache["pooled"]
    grads["head.fc2.weight"] = gout.T @ fc1
    grads["head.fc2.bias"] = gout.sum(axis=0)
    g_fc1 = (gout @ tensors["head.fc2.weight"]) * (fc1 > 0)
    grads["head.fc1.weight"] = g_fc1.T @ pooled
    grads["head.fc1.bias"] = g_fc1.sum(axis=0)
    g_pooled = g_fc1 @ tensors["head.fc1.weight"]

    n, feat, hh, ww = cache["pool_shape"]
    g_h = np.broadcast_to(g_pooled[:, :, None, None] / (hh * ww), (n, feat, hh, ww)).copy()

    for block, c1, r1, c2, cp, block_out in reversed(cache["blocks"]):
        g_pre = g_h * (block_out > 0)
        k2 = tensors[block.conv2.name]
        grads[block.conv2.name] = _conv_backward_kernel(c2, k2.shape, g_pre)
        g_r1 = _conv_backward_input(c2, k2, 1, 1, g_pre)
        g_h1 = g_r1 * (r1 > 0)
        k1 = tensors[block.conv1.name]
        grads[block.conv1.name] = _conv_backward_kernel(c1, k1.shape, g_h1)
        g_in = _conv_backward_input(c1, k1, block.conv1.stride, block.conv1.pad, g_h1)
        if block.proj is not None:
            kp = tensors[block.proj.name]
            grads[block.proj.name] = _conv_backward_kernel(cp, kp.shape, g_pre)
            g_h = g_in + _conv_backward_input(cp, kp, block.proj.stride, 0, g_pre)
        else:
            g_h = g_in + g_pre

    # input gradient of the stem is never needed: only its kernel gradient
    g_stem = g_h * (cache["stem_out"] > 0)
    grads["stem.kernel"] = _conv_backward_kernel(
        cache["stem"], tensors["stem.kernel"].shape, g_stem
    )
    return grads


# ---------------------------------------------------------------------------
# public operations


def forward(model: ModelWeights, plate: PlateMatrix) -> tuple[float, float]:
    """Predict the normalized (frequency, |S21|) pair for one plate."""
    x = encode_plates(plate.cells, model.config.input_encoding)
    out, _ = _forward_batch(model, x)
    return float(out[0, 0]), float(out[0, 1])


def forward_many(model: ModelWeights, plates: np.ndarray) -> np.ndarray:
    """Batched inference over (N, 43, 43) bit grids; returns (N, 2) normalized pairs."""
    return forward_many_encoded(model, encode_plates(plates, model.config.input_encoding))


def forward_many_encoded(model: ModelWeights, x: np.ndarray) -> np.ndarray:
    """Chunked inference over already-encoded input (N, 1, 43, 43)."""
    outs = []
    for lo in range(0, x.shape[0], _BATCH_CHUNK):
        out, _ = _forward_batch(model, x[lo : lo + _BATCH_CHUNK])
        outs.append(out)
    return np.concatenate(outs, axis=0)


def predict_physical(
    model: ModelWeights, normalizer: TargetNormalizer, plate: PlateMatrix
) -> ResonancePoint:
    """De-normalized prediction, clamped into the normalizer's physical ranges."""
    f_norm, s_norm = forward(model, plate)
    f, s = normalizer.denormalize(f_norm, s_norm)
    return ResonancePoint(f, s)


def loss_and_gradients(model: ModelWeights, batch) -> tuple[float, dict[str, np.ndarray]]:
    """Mean absolute error over a batch of (plate, (f_norm, s_norm)) pairs, with gradients.

    The subgradient of |.| at zero is taken as 0. Gradients are averaged over
    batch entries and both outputs, matching the loss.
    """
    plates = []
    targets = []
    for plate, target in batch:
        plates.append(plate.cells if isinstance(plate, PlateMatrix) else plate)
        targets.append(target)
    if not plates:
        raise ConfigError("batch must be non-empty")
    x = encode_plates(np.stack(plates), model.config.input_encoding)
    y = np.asarray(targets, dtype=np.float64).reshape(len(plates), 2)
    return _loss_and_gradients_encoded(model, x, y)


def _loss_and_gradients_encoded(
    model: ModelWeights, x: np.ndarray, y: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    n = x.shape[0]
    scale = 1.0 / (n * y.shape[1])
    total_loss = 0.0
    grads = {name: np.zeros_like(t) for name, t in model.tensors.items()}
    for lo in range(0, n, _BATCH_CHUNK):
        xc, yc = x[lo : lo + _BATCH_CHUNK], y[lo : lo + _BATCH_CHUNK]
        out, cache = _forward_batch(model, xc, keep_cache=True)
        diff = out - yc
        total_loss += float(np.abs(diff).sum())
        chunk_grads = _backward_batch(model, cache, np.sign(diff) * scale)
        for name in grads:
            grads[name] += chunk_grads[name]
    return total_loss * scale, grads


def sgd_step(
    model: ModelWeights,
    gradients: dict[str, np.ndarray],
    velocity: dict[str, np.ndarray],
    lr: float,
    momentum: float,
) -> tuple[ModelWeights, dict[str, np.ndarray]]:
    """Momentum update, elementwise: v <- momentum*v - lr*g; w <- w + v. In place."""
    for name, w in model.tensors.items():
        v = velocity[name]
        v *= momentum
        v -= lr * gradients[name]
        w += v
    return model, velocity


def mae(pred, target) -> float:
    """Mean absolute difference of two equal-length sequences."""
    p = np.asarray(pred, dtype=np.float64).ravel()
    t = np.asarray(target, dtype=np.float64).ravel()
    if p.size == 0 or p.size != t.size:
        raise ValueError("sequences must be non-empty and the same length")
    return float(np.mean(np.abs(p - t)))


def iter_block_kernel_names(config: SurrogateConfig) -> Iterator[tuple[str, ...]]:
    """Names of the residual-mapping kernels per block (conv1, conv2), excluding shortcuts."""
    for block in _plan_blocks(config):
        yield (block.conv1.name, block.conv2.name)
