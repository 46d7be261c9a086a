"""Fixed-step RK4 over a flattened block table.

Blocks are stored in topological order. Each integration stage re-evaluates
the combinational part of the network from the trigger states, then takes the
derivatives of every trigger's (i_fb, i_out) pair.
"""
import math

import numpy as np
from numba import njit

from .blocks import BlockKind
from .network import Network

K_SOURCE = 0
K_SCHMITT = 1
K_INV = 2
K_HEAVISIDE = 3
K_PROBE = 4

KIND_CODES = {
    BlockKind.SOURCE: K_SOURCE,
    BlockKind.SCHMITT: K_SCHMITT,
    BlockKind.INV_SCHMITT: K_INV,
    BlockKind.HEAVISIDE: K_HEAVISIDE,
    BlockKind.PROBE: K_PROBE,
}


class BlockTable:
    """Arrays describing a Network for the compiled kernel."""

    def __init__(self, network: Network):
        order = list(network.order)
        pos = {bid: i for i, bid in enumerate(order)}
        n = len(order)

        self.order = order
        self.pos = pos
        self.sources = network.sources
        self.kind = np.zeros(n, dtype=np.int64)
        self.src_slot = np.full(n, -1, dtype=np.int64)

        ptr = [0]
        idx = []
        for bid in order:
            idx.extend(pos[d] for d in network.inputs[bid])
            ptr.append(len(idx))
        self.drv_ptr = np.asarray(ptr, dtype=np.int64)
        self.drv_idx = np.asarray(idx, dtype=np.int64)

        # threshold, width, gain, steepness, tau_fb, tau_out, coupling
        self.param = np.zeros((n, 7), dtype=np.float64)

        for i, bid in enumerate(order):
            block = network.blocks[bid]
            self.kind[i] = KIND_CODES[block.kind]
            if block.kind is BlockKind.SOURCE:
                self.src_slot[i] = self.sources.index(bid)
            elif block.is_trigger:
                op = block.schmitt.op
                dyn = block.schmitt.dyn
                self.param[i] = (op.i_th_high, op.hyst_width, op.high_level, dyn.steepness_k,
                                 dyn.tau_fb, dyn.tau_out, dyn.overshoot_coupling)
            elif block.kind is BlockKind.HEAVISIDE:
                hp = block.heaviside
                self.param[i, 0] = hp.threshold
                self.param[i, 2] = hp.gain
                self.param[i, 3] = hp.k


@njit(cache=True)
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def _evaluate(kind, src_slot, drv_ptr, drv_idx, param, fb, out, u, y, inp):
    for i in range(kind.shape[0]):
        s = 0.0
        for j in range(drv_ptr[i], drv_ptr[i + 1]):
            s += y[drv_idx[j]]
        inp[i] = s
        k = kind[i]
        if k == K_SOURCE:
            y[i] = u[src_slot[i]]
        elif k == K_SCHMITT or k == K_INV:
            v = out[i] if out[i] > 0.0 else 0.0
            if k == K_INV:
                g = param[i, 2]
                v = g - v
                if v < 0.0:
                    v = 0.0
            y[i] = v
        elif k == K_HEAVISIDE:
            y[i] = param[i, 2] * _sigmoid(param[i, 3] * (s - param[i, 0]))
        else:
            y[i] = s


@njit(cache=True)
def _derivs(kind, param, fb, out, inp, dfb, dout):
    for i in range(kind.shape[0]):
        k = kind[i]
        if k == K_SCHMITT or k == K_INV:
            th = param[i, 0]
            w = param[i, 1]
            g = param[i, 2]
            a = _sigmoid(param[i, 3] * (inp[i] + fb[i] - th))
            drive = w * out[i] / g - fb[i]
            dfb[i] = drive / param[i, 4]
            dout[i] = (g * a + param[i, 6] * (g / w) * drive - out[i]) / param[i, 5]
        else:
            dfb[i] = 0.0
            dout[i] = 0.0


@njit(cache=True)
def integrate_chunk(kind, src_slot, drv_ptr, drv_idx, param, fb, out,
                    u_start, u_mid, u_end, dt, step0, save_every, probe_pos, rec):
    """Advance ``fb``/``out`` in place over ``u_start.shape[1]`` steps.

    Probe outputs are written to ``rec`` after global step g when
    g % save_every == 0; ``u_start`` carries one extra column for that.
    """
    n = kind.shape[0]
    n_steps = u_start.shape[1] - 1
    y = np.zeros(n)
    inp = np.zeros(n)
    k1f = np.zeros(n)
    k1o = np.zeros(n)
    k2f = np.zeros(n)
    k2o = np.zeros(n)
    k3f = np.zeros(n)
    k3o = np.zeros(n)
    k4f = np.zeros(n)
    k4o = np.zeros(n)
    tf = np.zeros(n)
    to = np.zeros(n)

    for s in range(n_steps):
        _evaluate(kind, src_slot, drv_ptr, drv_idx, param, fb, out, u_start[:, s], y, inp)
        _derivs(kind, param, fb, out, inp, k1f, k1o)

        for i in range(n):
            tf[i] = fb[i] + 0.5 * dt * k1f[i]
            to[i] = out[i] + 0.5 * dt * k1o[i]
        _evaluate(kind, src_slot, drv_ptr, drv_idx, param, tf, to, u_mid[:, s], y, inp)
        _derivs(kind, param, tf, to, inp, k2f, k2o)

        for i in range(n):
            tf[i] = fb[i] + 0.5 * dt * k2f[i]
            to[i] = out[i] + 0.5 * dt * k2o[i]
        _evaluate(kind, src_slot, drv_ptr, drv_idx, param, tf, to, u_mid[:, s], y, inp)
        _derivs(kind, param, tf, to, inp, k3f, k3o)

        for i in range(n):
            tf[i] = fb[i] + dt * k3f[i]
            to[i] = out[i] + dt * k3o[i]
        _evaluate(kind, src_slot, drv_ptr, drv_idx, param, tf, to, u_end[:, s], y, inp)
        _derivs(kind, param, tf, to, inp, k4f, k4o)

        for i in range(n):
            fb[i] += dt / 6.0 * (k1f[i] + 2.0 * k2f[i] + 2.0 * k3f[i] + k4f[i])
            out[i] += dt / 6.0 * (k1o[i] + 2.0 * k2o[i] + 2.0 * k3o[i] + k4o[i])

        g_step = step0 + s + 1
        if g_step % save_every == 0:
            _evaluate(kind, src_slot, drv_ptr, drv_idx, param, fb, out, u_start[:, s + 1], y, inp)
            col = g_step // save_every
            for p in range(probe_pos.shape[0]):
                rec[p, col] = y[probe_pos[p]]


@njit(cache=True)
def record_now(kind, src_slot, drv_ptr, drv_idx, param, fb, out, u, probe_pos, rec, col):
    n = kind.shape[0]
    y = np.zeros(n)
    inp = np.zeros(n)
    _evaluate(kind, src_slot, drv_ptr, drv_idx, param, fb, out, u, y, inp)
    for p in range(probe_pos.shape[0]):
        rec[p, col] = y[probe_pos[p]]
