"""From-scratch neural classifiers: dense (DNN), stacked LSTM (RNN), 1-D CNN.

All three share the same training loop: mini-batch Adam, per-epoch
validation, learning-rate reduction on plateau, early stopping with best
weights restored. Everything is float64 and driven by one seeded RNG, so
a fit is bit-reproducible.
"""

from __future__ import annotations

import numpy as np

from ..errors import DivergenceError
from .common import (
    AdamState,
    Dataset,
    ScalerParams,
    TrainConfig,
    adam_step,
    cross_entropy,
    softmax,
    stratified_split,
)


def _kaiming_uniform(rng, shape, fan_in):
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, shape)


def _scaled_uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, shape)


def _dropout_mask(rng, shape, rate):
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _ce_grad(proba, y):
    g = proba.copy()
    g[np.arange(len(y)), y] -= 1.0
    return g / len(y)


class MlpModel:
    """Dense softmax classifier: in -> 128 -> 64 -> classes, ReLU hidden."""

    kind = "dnn"

    def __init__(self, weights, label_names, dropout_rate=0.3, scaler=None):
        self.weights = weights  # [W1, b1, W2, b2, W3, b3]
        self.label_names = list(label_names)
        self.dropout_rate = dropout_rate
        self.scaler: ScalerParams | None = scaler

    @classmethod
    def build(cls, n_features, label_names, seed=0, hidden=(128, 64), dropout_rate=0.3):
        rng = np.random.default_rng(seed)
        dims = [n_features, *hidden, len(label_names)]
        weights = []
        for d_in, d_out in zip(dims[:-1], dims[1:]):
            weights.append(_kaiming_uniform(rng, (d_in, d_out), d_in))
            weights.append(np.zeros(d_out))
        return cls(weights, label_names, dropout_rate)

    @property
    def params(self):
        return self.weights

    @property
    def n_features(self):
        return self.weights[0].shape[0]

    @property
    def n_classes(self):
        return len(self.label_names)

    def _forward(self, X, rng=None):
        W1, b1, W2, b2, W3, b3 = self.weights
        h1 = np.maximum(0.0, X @ W1 + b1)
        m1 = _dropout_mask(rng, h1.shape, self.dropout_rate) if rng else 1.0
        h1d = h1 * m1
        h2 = np.maximum(0.0, h1d @ W2 + b2)
        m2 = _dropout_mask(rng, h2.shape, self.dropout_rate) if rng else 1.0
        h2d = h2 * m2
        logits = h2d @ W3 + b3
        return logits, (X, h1, m1, h1d, h2, m2, h2d)

    def loss_value(self, X, y, training=False):
        logits, _ = self._forward(np.atleast_2d(X))
        return cross_entropy(softmax(logits), y)

    def loss_grads(self, X, y, rng=None):
        W1, b1, W2, b2, W3, b3 = self.weights
        logits, (X, h1, m1, h1d, h2, m2, h2d) = self._forward(np.atleast_2d(X), rng)
        proba = softmax(logits)
        loss = cross_entropy(proba, y)
        d = _ce_grad(proba, y)
        dW3 = h2d.T @ d
        db3 = d.sum(axis=0)
        dh2 = (d @ W3.T) * m2 * (h2 > 0)
        dW2 = h1d.T @ dh2
        db2 = dh2.sum(axis=0)
        dh1 = (dh2 @ W2.T) * m1 * (h1 > 0)
        dW1 = X.T @ dh1
        db1 = dh1.sum(axis=0)
        return loss, [dW1, db1, dW2, db2, dW3, db3]

    def predict_proba(self, X):
        logits, _ = self._forward(np.atleast_2d(np.asarray(X, dtype=np.float64)))
        return softmax(logits)


class _LstmLayer:
    """One LSTM layer over batch-first sequences; gates ordered i, f, g, o."""

    def __init__(self, Wx, Wh, b):
        self.Wx, self.Wh, self.b = Wx, Wh, b

    @classmethod
    def build(cls, rng, d_in, units, forget_bias=1.0):
        Wx = _scaled_uniform(rng, (d_in, 4 * units), d_in)
        Wh = _scaled_uniform(rng, (units, 4 * units), units)
        b = np.zeros(4 * units)
        b[units : 2 * units] = forget_bias
        return cls(Wx, Wh, b)

    @property
    def units(self):
        return self.Wh.shape[0]

    def forward(self, x):
        B, T, _ = x.shape
        H = self.units
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        cache = []
        out = np.empty((B, T, H))
        for t in range(T):
            z = x[:, t, :] @ self.Wx + h @ self.Wh + self.b
            i = _sigmoid(z[:, :H])
            f = _sigmoid(z[:, H : 2 * H])
            g = np.tanh(z[:, 2 * H : 3 * H])
            o = _sigmoid(z[:, 3 * H :])
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h = o * tc
            out[:, t, :] = h
            cache.append((x[:, t, :], h, c_prev, i, f, g, o, tc))
        self._cache = cache
        return out

    def backward(self, d_out):
        """d_out: (B, T, H) gradient on the output sequence. Returns
        (dx, [dWx, dWh, db])."""
        cache = self._cache
        B, T, H = d_out.shape
        dWx = np.zeros_like(self.Wx)
        dWh = np.zeros_like(self.Wh)
        db = np.zeros_like(self.b)
        dx = np.empty((B, T, self.Wx.shape[0]))
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in reversed(range(T)):
            x_t, _h, c_prev, i, f, g, o, tc = cache[t]
            dh = d_out[:, t, :] + dh_next
            do = dh * tc
            dc = dh * o * (1.0 - tc**2) + dc_next
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g**2),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            dWx += x_t.T @ dz
            dWh += (cache[t - 1][1] if t > 0 else np.zeros((B, H))).T @ dz
            db += dz.sum(axis=0)
            dx[:, t, :] = dz @ self.Wx.T
            dh_next = dz @ self.Wh.T
            dc_next = dc * f
        return dx, [dWx, dWh, db]


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


class LstmModel:
    """Stacked LSTM over the feature vector read as a 1-feature sequence."""

    kind = "rnn"

    def __init__(self, layer1, layer2, W_out, b_out, label_names, seq_len=27,
                 dropout_rate=0.2, scaler=None):
        self.layer1 = layer1
        self.layer2 = layer2
        self.W_out, self.b_out = W_out, b_out
        self.label_names = list(label_names)
        self.seq_len = seq_len
        self.dropout_rate = dropout_rate
        self.scaler: ScalerParams | None = scaler

    @classmethod
    def build(cls, n_features, label_names, seed=0, units=(64, 32), dropout_rate=0.2):
        rng = np.random.default_rng(seed)
        layer1 = _LstmLayer.build(rng, 1, units[0])
        layer2 = _LstmLayer.build(rng, units[0], units[1])
        W_out = _kaiming_uniform(rng, (units[1], len(label_names)), units[1])
        b_out = np.zeros(len(label_names))
        return cls(layer1, layer2, W_out, b_out, label_names, seq_len=n_features,
                   dropout_rate=dropout_rate)

    @property
    def params(self):
        return [
            self.layer1.Wx, self.layer1.Wh, self.layer1.b,
            self.layer2.Wx, self.layer2.Wh, self.layer2.b,
            self.W_out, self.b_out,
        ]

    @property
    def n_features(self):
        return self.seq_len  # one timestep per feature

    @property
    def n_classes(self):
        return len(self.label_names)

    def _forward(self, X, rng=None):
        seq = np.atleast_2d(X)[:, :, None]
        s1 = self.layer1.forward(seq)
        m1 = _dropout_mask(rng, s1.shape, self.dropout_rate) if rng else 1.0
        s2 = self.layer2.forward(s1 * m1)
        last = s2[:, -1, :]
        m2 = _dropout_mask(rng, last.shape, self.dropout_rate) if rng else 1.0
        logits = last * m2 @ self.W_out + self.b_out
        return logits, (s1, m1, s2, last, m2)

    def loss_value(self, X, y, training=False):
        logits, _ = self._forward(np.atleast_2d(X))
        return cross_entropy(softmax(logits), y)

    def loss_grads(self, X, y, rng=None):
        X = np.atleast_2d(X)
        logits, (s1, m1, s2, last, m2) = self._forward(X, rng)
        proba = softmax(logits)
        loss = cross_entropy(proba, y)
        d = _ce_grad(proba, y)
        dW_out = (last * m2).T @ d
        db_out = d.sum(axis=0)
        d_last = (d @ self.W_out.T) * m2
        d_s2 = np.zeros_like(s2)
        d_s2[:, -1, :] = d_last
        d_s1d, g2 = self.layer2.backward(d_s2)
        _, g1 = self.layer1.backward(d_s1d * m1)
        return loss, [*g1, *g2, dW_out, db_out]

    def predict_proba(self, X):
        logits, _ = self._forward(np.atleast_2d(np.asarray(X, dtype=np.float64)))
        return softmax(logits)


def _conv1d_forward(x, W, b):
    """Same-padded width-3 convolution; x is (B, C_in, L)."""
    B, _, L = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1)))
    cols = np.stack([xp[:, :, k : k + L] for k in range(3)], axis=3)  # (B,Cin,L,3)
    y = np.einsum("bclk,ock->bol", cols, W) + b[None, :, None]
    return y, cols


def _conv1d_backward(d_y, cols, W):
    dW = np.einsum("bclk,bol->ock", cols, d_y)
    db = d_y.sum(axis=(0, 2))
    B, L = d_y.shape[0], d_y.shape[2]
    dxp = np.zeros((B, W.shape[1], L + 2))
    for k in range(3):
        dxp[:, :, k : k + L] += np.einsum("bol,oc->bcl", d_y, W[:, :, k])
    return dxp[:, :, 1:-1], dW, db


class _BatchNorm:
    """Per-channel batch normalization for (B, C, L) tensors."""

    def __init__(self, gamma, beta, running_mean, running_var, momentum=0.9, eps=1e-5):
        self.gamma, self.beta = gamma, beta
        self.running_mean, self.running_var = running_mean, running_var
        self.momentum, self.eps = momentum, eps

    @classmethod
    def build(cls, channels):
        return cls(np.ones(channels), np.zeros(channels), np.zeros(channels), np.ones(channels))

    def forward(self, x, training, update_running=False):
        if training:
            mean = x.mean(axis=(0, 2))
            var = x.var(axis=(0, 2))
            if update_running:
                self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * mean
                self.running_var = self.momentum * self.running_var + (1 - self.momentum) * var
        else:
            mean, var = self.running_mean, self.running_var
        ivar = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[None, :, None]) * ivar[None, :, None]
        self._cache = (xhat, ivar, x.shape[0] * x.shape[2])
        return self.gamma[None, :, None] * xhat + self.beta[None, :, None]

    def backward(self, d_y):
        xhat, ivar, n = self._cache
        d_gamma = (d_y * xhat).sum(axis=(0, 2))
        d_beta = d_y.sum(axis=(0, 2))
        d_xhat = d_y * self.gamma[None, :, None]
        term = (
            d_xhat
            - d_xhat.mean(axis=(0, 2))[None, :, None]
            - xhat * (d_xhat * xhat).mean(axis=(0, 2))[None, :, None]
        )
        return term * ivar[None, :, None], d_gamma, d_beta


class CnnModel:
    """1-D convnet: conv16-BN-ReLU-pool2, conv32-BN-ReLU, GAP, dense softmax."""

    kind = "cnn"

    def __init__(self, conv1_W, conv1_b, bn1, conv2_W, conv2_b, bn2, W_out, b_out,
                 label_names, input_len=27, scaler=None):
        self.conv1_W, self.conv1_b = conv1_W, conv1_b
        self.bn1 = bn1
        self.conv2_W, self.conv2_b = conv2_W, conv2_b
        self.bn2 = bn2
        self.W_out, self.b_out = W_out, b_out
        self.label_names = list(label_names)
        self.input_len = input_len
        self.scaler: ScalerParams | None = scaler

    @classmethod
    def build(cls, n_features, label_names, seed=0, channels=(16, 32)):
        rng = np.random.default_rng(seed)
        c1, c2 = channels
        conv1_W = _kaiming_uniform(rng, (c1, 1, 3), 3)
        conv2_W = _kaiming_uniform(rng, (c2, c1, 3), c1 * 3)
        W_out = _kaiming_uniform(rng, (c2, len(label_names)), c2)
        return cls(
            conv1_W, np.zeros(c1), _BatchNorm.build(c1),
            conv2_W, np.zeros(c2), _BatchNorm.build(c2),
            W_out, np.zeros(len(label_names)), label_names, input_len=n_features,
        )

    @property
    def params(self):
        return [
            self.conv1_W, self.conv1_b, self.bn1.gamma, self.bn1.beta,
            self.conv2_W, self.conv2_b, self.bn2.gamma, self.bn2.beta,
            self.W_out, self.b_out,
        ]

    @property
    def n_features(self):
        return self.input_len

    @property
    def n_classes(self):
        return len(self.label_names)

    def _forward(self, X, training, update_running=False):
        x = np.atleast_2d(X)[:, None, :]  # (B, 1, L)
        y1, cols1 = _conv1d_forward(x, self.conv1_W, self.conv1_b)
        n1 = self.bn1.forward(y1, training, update_running)
        r1 = np.maximum(0.0, n1)
        L2 = r1.shape[2] // 2
        pooled = r1[:, :, : 2 * L2].reshape(r1.shape[0], r1.shape[1], L2, 2)
        arg = pooled.argmax(axis=3)
        p1 = pooled.max(axis=3)
        y2, cols2 = _conv1d_forward(p1, self.conv2_W, self.conv2_b)
        n2 = self.bn2.forward(y2, training, update_running)
        r2 = np.maximum(0.0, n2)
        gap = r2.mean(axis=2)
        logits = gap @ self.W_out + self.b_out
        cache = (cols1, n1, pooled, arg, cols2, n2, r2, gap)
        return logits, cache

    def loss_value(self, X, y, training=False):
        logits, _ = self._forward(np.atleast_2d(X), training)
        return cross_entropy(softmax(logits), y)

    def loss_grads(self, X, y, rng=None, update_running=True):
        X = np.atleast_2d(X)
        logits, cache = self._forward(X, training=True, update_running=update_running)
        cols1, n1, pooled, arg, cols2, n2, r2, gap = cache
        proba = softmax(logits)
        loss = cross_entropy(proba, y)
        d = _ce_grad(proba, y)
        dW_out = gap.T @ d
        db_out = d.sum(axis=0)
        d_gap = d @ self.W_out.T
        d_r2 = np.repeat(d_gap[:, :, None], r2.shape[2], axis=2) / r2.shape[2]
        d_n2 = d_r2 * (n2 > 0)
        d_y2, d_bn2g, d_bn2b = self.bn2.backward(d_n2)
        d_p1, dW2, db2 = _conv1d_backward(d_y2, cols2, self.conv2_W)
        d_pooled = np.zeros_like(pooled)
        bi, ci, li = np.indices(arg.shape)
        d_pooled[bi, ci, li, arg] = d_p1
        d_r1 = np.zeros(n1.shape)
        d_r1[:, :, : 2 * d_pooled.shape[2]] = d_pooled.reshape(
            n1.shape[0], n1.shape[1], -1
        )
        d_n1 = d_r1 * (n1 > 0)
        d_y1, d_bn1g, d_bn1b = self.bn1.backward(d_n1)
        _, dW1, db1 = _conv1d_backward(d_y1, cols1, self.conv1_W)
        return loss, [dW1, db1, d_bn1g, d_bn1b, dW2, db2, d_bn2g, d_bn2b, dW_out, db_out]

    def predict_proba(self, X):
        logits, _ = self._forward(
            np.atleast_2d(np.asarray(X, dtype=np.float64)), training=False
        )
        return softmax(logits)


def _fit_network(model, dataset: Dataset, config: TrainConfig):
    """Shared loop: Adam, plateau LR reduction, early stop, best-weights restore."""
    rng = np.random.default_rng(config.seed)
    tr, va = stratified_split(dataset.y, config.validation_fraction, config.seed)
    Xtr, ytr = dataset.X[tr], dataset.y[tr]
    Xva, yva = dataset.X[va], dataset.y[va]

    opt = AdamState.for_params(model.params)
    lr = config.learning_rate
    best_loss = np.inf
    best_weights = [p.copy() for p in model.params]
    since_best = 0
    since_reduce = 0
    history = []
    for _epoch in range(config.epochs):
        order = rng.permutation(len(Xtr))
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = model.loss_grads(Xtr[idx], ytr[idx], rng=rng)
            if not np.isfinite(loss):
                raise DivergenceError(f"{model.kind} training loss became non-finite")
            adam_step(model.params, grads, opt, lr)
        val_loss = model.loss_value(Xva, yva)
        if not np.isfinite(val_loss):
            raise DivergenceError(f"{model.kind} validation loss became non-finite")
        history.append(val_loss)
        if val_loss < best_loss:
            best_loss = val_loss
            best_weights = [p.copy() for p in model.params]
            since_best = 0
            since_reduce = 0
        else:
            since_best += 1
            since_reduce += 1
            if since_reduce >= config.lr_reduce_patience:
                lr *= config.lr_reduce_factor
                since_reduce = 0
            if since_best >= config.early_stop_patience:
                break
    for p, w in zip(model.params, best_weights):
        p[...] = w
    model.best_val_loss = float(best_loss)
    model.val_history = history
    return model


def mlp_fit(dataset: Dataset, config: TrainConfig | None = None,
            scaler: ScalerParams | None = None) -> MlpModel:
    config = config or TrainConfig()
    model = MlpModel.build(dataset.X.shape[1], dataset.label_names, seed=config.seed)
    model.scaler = scaler
    return _fit_network(model, dataset, config)


def lstm_fit(dataset: Dataset, config: TrainConfig | None = None,
             scaler: ScalerParams | None = None) -> LstmModel:
    config = config or TrainConfig()
    model = LstmModel.build(dataset.X.shape[1], dataset.label_names, seed=config.seed)
    model.scaler = scaler
    return _fit_network(model, dataset, config)


def cnn_fit(dataset: Dataset, config: TrainConfig | None = None,
            scaler: ScalerParams | None = None) -> CnnModel:
    config = config or TrainConfig()
    model = CnnModel.build(dataset.X.shape[1], dataset.label_names, seed=config.seed)
    model.scaler = scaler
    return _fit_network(model, dataset, config)
