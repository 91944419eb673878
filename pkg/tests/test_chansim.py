import math

import numpy as np
import pytest

from fdstc import chansim as cs
from fdstc.errors import ShapeMismatch
from fdstc.stcode import enumerate_codebook, naf_frame_split, normalize_energy

SCN = cs.RelayScenario(N=2, n_s=1, n_r=1, n_d=2)


def _frames(code, rng):
    s = rng.choice([-1.0, 1.0], code.k)
    return naf_frame_split(code.codeword(s), 1, code.n // 2), s


def test_silenced_relay_leaves_the_direct_link(preset):
    code = preset("example1")
    rng = np.random.default_rng(0)
    frames, _ = _frames(code, rng)
    ch = cs.draw_channel(SCN, rng)
    ch.G = [0 * G for G in ch.G]
    pi = (0.7, 0.4, 0.9)
    rx = cs.naf_transmit(SCN, frames, ch, 10, 1, pi=pi, noiseless=True)
    for (Y1, Y2), C in zip(rx, frames):
        assert np.allclose(Y1, math.sqrt(pi[0] * 10) * ch.F @ C[:, :2])
        assert np.allclose(Y2, math.sqrt(pi[1] * 10) * ch.F @ C[:, 2:])


def test_zero_relay_power_gives_point_to_point_model(preset):
    code = preset("example1")
    rng = np.random.default_rng(1)
    frames, _ = _frames(code, rng)
    ch = cs.draw_channel(SCN, rng)
    eq = cs.equivalent_channel(SCN, ch, 10, pi=(1, 1, 0))
    for blk, C in zip(eq.blocks, eq.covariances):
        assert np.allclose(blk[2:, :1], 0)
        assert np.allclose(C, np.eye(4))


def test_equivalent_channel_reassembles_the_transmission(preset):
    code = preset("example1")
    rng = np.random.default_rng(2)
    frames, s = _frames(code, rng)
    ch = cs.draw_channel(SCN, rng)
    pi = cs.power_split(SCN, 10)
    rx = cs.naf_transmit(SCN, frames, ch, 10, 99, pi=pi)
    eq = cs.equivalent_channel(SCN, ch, 10, pi=pi)
    noise = cs._noise(SCN, np.random.default_rng(99))
    b = cs.relay_gain(pi[0], SCN.rho, 10.0, SCN.n_s)
    c = math.sqrt(pi[2] * 10) * b
    for i, ((Y1, Y2), C) in enumerate(zip(rx, frames)):
        V1, V2, W = noise[i]
        Xi = np.vstack([C[:, :2], C[:, 2:]])
        recon = eq.blocks[i] @ Xi + np.vstack([V1, V2 + c * ch.G[i] @ W])
        assert np.max(np.abs(recon - np.vstack([Y1, Y2]))) < 1e-12


def test_whitening_makes_noise_white():
    rng = np.random.default_rng(3)
    ch = cs.draw_channel(SCN, rng)
    eq = cs.equivalent_channel(SCN, ch, 15)
    for Wh, C in zip(eq.whiteners, eq.covariances):
        assert np.max(np.abs(Wh @ C @ Wh.conj().T - np.eye(4))) < 1e-10
    # sample check through the actual transmit path
    zero = [np.zeros((1, 4))] * SCN.N
    cols = []
    for t in range(2500):
        rx = cs.naf_transmit(SCN, zero, ch, 15, t)
        cols.append(eq.whiteners[0] @ np.vstack(rx[0]))
    Z = np.hstack(cols)
    cov = Z @ Z.conj().T / Z.shape[1]
    assert np.max(np.abs(cov - np.eye(4))) < 0.05


def test_channel_entry_variance():
    rng = np.random.default_rng(4)
    big = cs.RelayScenario(N=1, n_s=2, n_r=2, n_d=2)
    F = np.array([cs.draw_channel(big, rng).F for _ in range(25000)])
    v = np.mean(np.abs(F) ** 2, axis=0)
    assert np.all((v > 0.98) & (v < 1.02))


def test_received_snr_matches_target(preset):
    code = normalize_energy(preset("example1"), (-1, 1))
    scn = cs.RelayScenario(N=2, n_d=2)
    pi = cs.power_split(scn, 10, cs.partition_energies(code, 1))
    tot = cnt = 0
    for f in range(10000):
        rng = np.random.default_rng([5, f])
        frames, _ = _frames(code, rng)
        rx = cs.naf_transmit(scn, frames, cs.draw_channel(scn, rng), 10, rng, pi=pi, noiseless=True)
        for Y1, Y2 in rx:
            tot += np.sum(np.abs(Y1) ** 2) + np.sum(np.abs(Y2) ** 2)
            cnt += Y1.size + Y2.size
    assert abs(tot / cnt / 10 - 1) < 0.02


def test_whitened_decoding_equals_generalised_least_squares(preset):
    code = preset("alamouti")
    scn = cs.RelayScenario(N=1, n_d=2)
    cb = enumerate_codebook(code, (-1, 1))
    from fdstc.decode import DecodeProblem, ml_exhaustive
    for t in range(100):
        rng = np.random.default_rng([6, t])
        s = rng.choice([-1.0, 1.0], code.k)
        ch = cs.draw_channel(scn, rng)
        rx = cs.naf_transmit(scn, naf_frame_split(code.codeword(s), 1, 1), ch, 5, rng)
        eq = cs.equivalent_channel(scn, ch, 5)
        fast = ml_exhaustive(DecodeProblem(eq.whiten(rx), eq.virtual(), code, (-1, 1))).s
        Z = np.vstack(rx[0])
        Ci = np.linalg.inv(eq.covariances[0])
        metrics = []
        for X in cb.codewords:
            E = Z - eq.blocks[0] @ X
            metrics.append(np.trace(E.conj().T @ Ci @ E).real)
        coeffs = np.concatenate(list(cb.coefficient_chunks()))
        assert np.array_equal(fast, coeffs[int(np.argmin(metrics))])


def test_noise_free_limit(preset):
    rows = cs.run_bler(preset("alamouti"), cs.RelayScenario(N=1), "sphere", [60], 1000, seed=1)
    assert rows[0].bler == 0


def test_more_receive_antennas_help(preset):
    code = preset("alamouti")
    two = cs.run_bler(code, cs.RelayScenario(N=1, n_d=2), "sphere", [10], 3000, seed=2)[0]
    four = cs.run_bler(code, cs.RelayScenario(N=1, n_d=4), "sphere", [10], 3000, seed=2)[0]
    assert four.bler < two.bler


def test_results_are_schedule_independent(preset):
    code = preset("alamouti")
    a = cs.to_csv(cs.run_bler(code, cs.RelayScenario(N=1), "sphere", [0, 5], 200, seed=9))
    b = cs.to_csv(cs.run_bler(code, cs.RelayScenario(N=1), "sphere", [0, 5], 200, seed=9, threads=2))
    assert a == b
    assert a.splitlines()[0] == cs.CSV_HEADER


def test_mac_simulation_runs(preset):
    code = preset("mac_example")
    rows = cs.run_bler(code, cs.MacScenario(K=2), "grouped", [20], 20, seed=0)
    assert rows[0].trials == 20 and rows[0].bound_ok


def test_mac_single_user_is_the_user_code(preset):
    from fdstc.presets import mac_user_codes
    from fdstc.stcode import code_from_exact
    T, user = mac_user_codes()
    u = code_from_exact(T, user, {})
    one = cs.mac_assemble(cs.MacScenario(K=1), [u])
    assert np.array_equal(one.weights, u.weights)
    with pytest.raises(ShapeMismatch):
        cs.mac_assemble(cs.MacScenario(K=2), [u])


def test_wilson_interval_brackets_the_estimate():
    lo, hi = cs.wilson(7, 100)
    assert lo < 0.07 < hi
    assert cs.wilson(0, 50)[0] == 0


def test_crossing_interpolation():
    rows = [cs.BlerRow(0, 0.1, 0, 0, 1, 0), cs.BlerRow(10, 0.001, 0, 0, 1, 0)]
    assert cs.snr_at_bler(rows, 0.01) == pytest.approx(5.0)


def test_relay_antenna_constraint():
    with pytest.raises(ValueError):
        cs.RelayScenario(N=1, n_s=1, n_r=2)
