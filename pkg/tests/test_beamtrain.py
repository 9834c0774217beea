import numpy as np
import pytest

from beamentropy.array import ArrayGeometry, beam_centers, dft_codebook, steering_vector_at
from beamentropy.beamstats import BeamPmf
from beamentropy.beamtrain import GainMatrix, expected_probe_count, select_best, sweep
from beamentropy.channel import ChannelMatrix, apply_tx_power, draw_realization, realization_to_matrix, scenario_defaults
from beamentropy.errors import DomainError
from beamentropy.montecarlo import substream

from oracles import brute_best_pair


def _cbs(nt, nr):
    return dft_codebook(ArrayGeometry(nt)), dft_codebook(ArrayGeometry(nr))


def test_all_ones_channel(backend):
    tcb, rcb = _cbs(4, 4)
    gm = sweep(ChannelMatrix(np.ones((4, 4)), 28.0), tcb, rcb)
    assert gm.values[0, 0] == pytest.approx(4.0, rel=1e-14)
    rest = gm.values.copy()
    rest[0, 0] = 0
    assert rest.max() < 1e-10


def test_zero_channel_is_degenerate(backend):
    tcb, rcb = _cbs(8, 4)
    gm = sweep(np.zeros((4, 8)), tcb, rcb)
    assert np.all(gm.values == 0)
    sel = select_best(gm)
    assert sel.degenerate and sel.gain == 0.0


def test_on_grid_single_path_16x256(backend):
    tx, rx = ArrayGeometry(256), ArrayGeometry(16)
    tcb, rcb = dft_codebook(tx), dft_codebook(rx)
    a_rx = steering_vector_at(rx, beam_centers(16)[3]).elements
    a_tx = steering_vector_at(tx, beam_centers(256)[17]).elements
    gm = sweep(np.outer(a_rx, a_tx.conj()), tcb, rcb)
    assert gm.values[3, 17] == pytest.approx(64.0, rel=1e-12)
    others = gm.values.copy()
    others[3, 17] = 0
    assert others.max() < 1e-9 * 64
    sel = select_best(gm)
    assert (sel.tx_beam, sel.rx_beam) == (17, 3)


def test_select_single_nonzero():
    v = np.zeros((16, 256))
    v[3, 17] = 2.5
    sel = select_best(GainMatrix(v))
    assert (sel.tx_beam, sel.rx_beam, sel.gain, sel.degenerate) == (17, 3, 2.5, False)


def test_tie_break_lowest_rx():
    v = np.zeros((4, 8))
    v[2, 5] = v[0, 5] = 1.0
    assert select_best(GainMatrix(v)).rx_beam == 0
    v = np.zeros((4, 8))
    v[1, 6] = v[1, 2] = 1.0
    assert select_best(GainMatrix(v)).tx_beam == 2


def test_dimension_mismatch():
    tcb, rcb = _cbs(8, 4)
    with pytest.raises(DomainError):
        sweep(np.ones((4, 16)), tcb, rcb)


def test_matches_brute_force_double_loop(backend):
    cfg = scenario_defaults("UMi", 28)
    tx, rx = ArrayGeometry(32), ArrayGeometry(8)
    tcb, rcb = dft_codebook(tx), dft_codebook(rx)
    rng = np.random.default_rng(5)
    for r in range(1000):
        if r % 2:
            h = realization_to_matrix(draw_realization(cfg, substream(13, r)), tx, rx, 0.0, 28.0).entries
        else:
            h = rng.normal(size=(8, 32)) + 1j * rng.normal(size=(8, 32))
        sel = select_best(sweep(h, tcb, rcb))
        bi, bj, best = brute_best_pair(h, tcb.weights, rcb.weights)
        assert (sel.rx_beam, sel.tx_beam) == (bi, bj)
        assert sel.gain == pytest.approx(best, rel=1e-12)


def test_frobenius_preserved(rng):
    tcb, rcb = _cbs(64, 8)
    h = rng.normal(size=(8, 64)) + 1j * rng.normal(size=(8, 64))
    assert np.linalg.norm(sweep(h, tcb, rcb).values) == pytest.approx(np.linalg.norm(h), rel=1e-12)


def test_resweep_bit_identical(rng):
    tcb, rcb = _cbs(64, 8)
    h = rng.normal(size=(8, 64)) + 1j * rng.normal(size=(8, 64))
    assert sweep(h, tcb, rcb) == sweep(h, tcb, rcb)


@pytest.mark.parametrize("c", [1e-6, 0.5, 3.0, 1e3, 10 ** 1.5])
def test_scale_invariance(c):
    cfg = scenario_defaults("UMa", 60)
    tx, rx = ArrayGeometry(64), ArrayGeometry(8)
    tcb, rcb = dft_codebook(tx), dft_codebook(rx)
    for r in range(50):
        h = realization_to_matrix(draw_realization(cfg, substream(21, r)), tx, rx, 0.0, 60.0)
        a = select_best(sweep(h, tcb, rcb))
        b = select_best(sweep(ChannelMatrix(h.entries * c, 60.0), tcb, rcb))
        assert (a.tx_beam, a.rx_beam) == (b.tx_beam, b.rx_beam)


def test_apply_tx_power_then_train():
    cfg = scenario_defaults("UMi", 28)
    tx, rx = ArrayGeometry(256), ArrayGeometry(16)
    tcb, rcb = dft_codebook(tx), dft_codebook(rx)
    for r in range(100):
        h = realization_to_matrix(draw_realization(cfg, substream(1, r)), tx, rx, 0.0, 28.0)
        a = select_best(sweep(h, tcb, rcb))
        b = select_best(sweep(apply_tx_power(h, 30.0), tcb, rcb))
        assert (a.tx_beam, a.rx_beam) == (b.tx_beam, b.rx_beam)


class TestExpectedProbeCount:
    def test_deterministic(self):
        assert expected_probe_count(BeamPmf([0, 0, 1.0, 0])) == 1.0

    def test_uniform(self):
        assert expected_probe_count(BeamPmf(np.full(16, 1 / 16))) == pytest.approx(8.5, abs=1e-12)

    def test_direct_sum(self):
        assert expected_probe_count([0.25, 0.5, 0.25]) == pytest.approx(1.75, abs=1e-15)

    def test_invalid(self):
        with pytest.raises(DomainError):
            expected_probe_count([0.5, 0.4])
