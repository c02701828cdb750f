"""Compiled in-place statevector kernels.

All kernels take a contiguous complex128 array whose length is a power of two
and mutate it in place. Qubits are addressed by their bit value ``1 << (q - 1)``.
"""

import numpy as np
from numba import njit

INV_SQRT2 = 1.0 / np.sqrt(2.0)

GATE_HADAMARD = 0
GATE_CX = 1
GATE_ORACLE = 2


@njit(cache=True, fastmath=True)
def hadamard(psi, bit):
    M = psi.shape[0]
    for base in range(0, M, 2 * bit):
        for x in range(base, base + bit):
            a = psi[x]
            b = psi[x + bit]
            psi[x] = (a + b) * INV_SQRT2
            psi[x + bit] = (a - b) * INV_SQRT2


@njit(cache=True)
def controlled_x(psi, tbit, cmask):
    # cmask == 0 gives a plain NOT on tbit
    M = psi.shape[0]
    for base in range(0, M, 2 * tbit):
        for x in range(base, base + tbit):
            if (x & cmask) == cmask:
                a = psi[x]
                psi[x] = psi[x + tbit]
                psi[x + tbit] = a


@njit(cache=True)
def oracle(psi, tau, n_half):
    psi[tau] = -psi[tau]
    psi[tau + n_half] = -psi[tau + n_half]


@njit(cache=True, fastmath=True)
def xx_rotation(psi, lo, hi, c, s):
    """exp(-i theta X_lo X_hi) with c = cos(theta), s = sin(theta); requires lo < hi."""
    M = psi.shape[0]
    for base in range(0, M, 2 * lo):
        off = lo + hi if (base & hi) == 0 else lo - hi
        for x in range(base, base + lo):
            y = x + off
            a = psi[x]
            b = psi[y]
            psi[x] = complex(c * a.real + s * b.imag, c * a.imag - s * b.real)
            psi[y] = complex(c * b.real + s * a.imag, c * b.imag - s * a.real)


@njit(cache=True, fastmath=True)
def mul_diag(psi, d):
    for x in range(psi.shape[0]):
        psi[x] *= d[x]


@njit(cache=True, fastmath=True)
def _leaf8(psi):
    for i in range(0, psi.shape[0], 8):
        a0 = psi[i]
        a1 = psi[i + 1]
        a2 = psi[i + 2]
        a3 = psi[i + 3]
        a4 = psi[i + 4]
        a5 = psi[i + 5]
        a6 = psi[i + 6]
        a7 = psi[i + 7]
        b0 = a0 + a1
        b1 = a0 - a1
        b2 = a2 + a3
        b3 = a2 - a3
        b4 = a4 + a5
        b5 = a4 - a5
        b6 = a6 + a7
        b7 = a6 - a7
        c0 = b0 + b2
        c2 = b0 - b2
        c1 = b1 + b3
        c3 = b1 - b3
        c4 = b4 + b6
        c6 = b4 - b6
        c5 = b5 + b7
        c7 = b5 - b7
        psi[i] = c0 + c4
        psi[i + 4] = c0 - c4
        psi[i + 1] = c1 + c5
        psi[i + 5] = c1 - c5
        psi[i + 2] = c2 + c6
        psi[i + 6] = c2 - c6
        psi[i + 3] = c3 + c7
        psi[i + 7] = c3 - c7


@njit(cache=True, fastmath=True)
def _radix4(psi, h):
    M = psi.shape[0]
    for i in range(0, M, 4 * h):
        for j in range(i, i + h):
            a = psi[j]
            b = psi[j + h]
            c = psi[j + 2 * h]
            d = psi[j + 3 * h]
            s0 = a + b
            s1 = a - b
            s2 = c + d
            s3 = c - d
            psi[j] = s0 + s2
            psi[j + 2 * h] = s0 - s2
            psi[j + h] = s1 + s3
            psi[j + 3 * h] = s1 - s3


@njit(cache=True, fastmath=True)
def _radix2(psi, h):
    M = psi.shape[0]
    for i in range(0, M, 2 * h):
        for j in range(i, i + h):
            a = psi[j]
            b = psi[j + h]
            psi[j] = a + b
            psi[j + h] = a - b


@njit(cache=True, fastmath=True)
def fwht(psi):
    """Unnormalized Walsh-Hadamard transform (applying it twice multiplies by M)."""
    M = psi.shape[0]
    h = 1
    if M >= 8:
        _leaf8(psi)
        h = 8
    while 4 * h <= M:
        _radix4(psi, h)
        h *= 4
    while h < M:
        _radix2(psi, h)
        h *= 2


@njit(cache=True, fastmath=True)
def fwht_mul(psi, d):
    """fwht(psi) followed by psi *= d, with the multiply fused into the last stage."""
    M = psi.shape[0]
    if M < 16:
        fwht(psi)
        mul_diag(psi, d)
        return
    half = M // 2
    _leaf8(psi)
    h = 8
    while 4 * h <= half:
        _radix4(psi, h)
        h *= 4
    while h < half:
        _radix2(psi, h)
        h *= 2
    for j in range(half):
        a = psi[j]
        b = psi[j + half]
        psi[j] = (a + b) * d[j]
        psi[j + half] = (a - b) * d[j + half]


@njit(cache=True, fastmath=True)
def fused_hadamard(psi, bit, z_before, z_after):
    """psi <- z_after * H_bit (z_before * psi)."""
    M = psi.shape[0]
    for base in range(0, M, 2 * bit):
        for x in range(base, base + bit):
            y = x + bit
            a = psi[x] * z_before[x]
            b = psi[y] * z_before[y]
            psi[x] = (a + b) * (INV_SQRT2 * z_after[x])
            psi[y] = (a - b) * (INV_SQRT2 * z_after[y])


@njit(cache=True, fastmath=True)
def fused_controlled_x(psi, tbit, cmask, z_before, z_after):
    """psi <- z_after * CX (z_before * psi)."""
    M = psi.shape[0]
    for base in range(0, M, 2 * tbit):
        for x in range(base, base + tbit):
            y = x + tbit
            a = psi[x] * z_before[x]
            b = psi[y] * z_before[y]
            if (x & cmask) == cmask:
                psi[x] = b * z_after[x]
                psi[y] = a * z_after[y]
            else:
                psi[x] = a * z_after[x]
                psi[y] = b * z_after[y]


@njit(cache=True, fastmath=True)
def split_propagator(psi, z_half, z_full, x_diag, substeps):
    """Strang-split exp(-i(Hz + Hxx) d) as Zh (F Dx F Z)^(k-1) F Dx F Zh.

    ``x_diag`` carries the XX phases in the Walsh-Hadamard frame, already
    divided by M so the two unnormalized transforms compose to the identity.
    """
    mul_diag(psi, z_half)
    _split_core(psi, z_full, x_diag, substeps)
    mul_diag(psi, z_half)


@njit(cache=True, fastmath=True)
def _split_core(psi, z_full, x_diag, substeps):
    for s in range(substeps):
        fwht_mul(psi, x_diag)
        fwht(psi)
        if s < substeps - 1:
            mul_diag(psi, z_full)


@njit(cache=True)
def apply_gate_code(psi, kind, tbit, cmask, tau, n_half):
    if kind == GATE_HADAMARD:
        hadamard(psi, tbit)
    elif kind == GATE_CX:
        controlled_x(psi, tbit, cmask)
    else:
        oracle(psi, tau, n_half)


@njit(cache=True)
def gate_sequence(psi, kinds, tbits, cmasks, tau, n_half):
    for g in range(kinds.shape[0]):
        apply_gate_code(psi, kinds[g], tbits[g], cmasks[g], tau, n_half)


@njit(cache=True)
def noisy_gate_sequence(psi, kinds, tbits, cmasks, slots, tau, n_half,
                        z_half, z_full, x_diag, substeps, ones):
    """Apply each gate followed by one split propagator per charged slot.

    The trailing half-step of one slot and the leading half-step of the next
    are fused with the gate between them; the oracle is diagonal and commutes
    with them. ``ones`` is an all-ones vector of the state length.
    """
    pending = False
    for g in range(kinds.shape[0]):
        kind = kinds[g]
        if kind == GATE_ORACLE:
            oracle(psi, tau, n_half)
            if slots[g] == 0:
                continue
            mul_diag(psi, z_full if pending else z_half)
        else:
            before = z_half if pending else ones
            after = z_half if slots[g] > 0 else ones
            if kind == GATE_HADAMARD:
                fused_hadamard(psi, tbits[g], before, after)
            else:
                fused_controlled_x(psi, tbits[g], cmasks[g], before, after)
            pending = False
            if slots[g] == 0:
                continue
        for s in range(slots[g]):
            if s > 0:
                mul_diag(psi, z_full)
            _split_core(psi, z_full, x_diag, substeps)
        pending = True
    if pending:
        mul_diag(psi, z_half)


@njit(cache=True, fastmath=True)
def apply_hamiltonian(psi, out, z_energy, x_energy, work):
    """out = (Hz + Hxx) psi with Hz diagonal and Hxx diagonal in the Walsh frame.

    ``x_energy`` is pre-divided by M. ``work`` is scratch of the same length.
    """
    M = psi.shape[0]
    for x in range(M):
        work[x] = psi[x]
    fwht(work)
    for x in range(M):
        work[x] *= x_energy[x]
    fwht(work)
    for x in range(M):
        out[x] = z_energy[x] * psi[x] + work[x]
