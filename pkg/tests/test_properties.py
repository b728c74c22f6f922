"""Property tests for the invariants each module promises."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from acoustic_ladder.errors import MetricsError, ParseError, SchemaError
from acoustic_ladder.fitting import AdmittanceTrace, fit_mbvd, log_magnitude_residual
from acoustic_ladder.formats import read_design, read_touchstone, write_design, write_touchstone
from acoustic_ladder.formats.designfile import DesignDocument, fragment_to_bytes
from acoustic_ladder.formats.touchstone import TouchstoneDocument
from acoustic_ladder.mbvd import (
    MotionalBranch,
    ResonatorModel,
    branch_to_rlc,
    rlc_to_branch,
    thickness_scale,
)
from acoustic_ladder.metrics import extract_metrics
from acoustic_ladder.network import SParameters, Stage, abcd_to_s, cascade, series_element, shunt_element, simulate
from acoustic_ladder.optimizer import DesignVariables

from ladders import build_design, draw_ladder, draw_resonator, oracle_sparameters
from oracles import brute_force_extrema, mbvd_admittance, rlc_from_table

seeds = st.integers(0, 2**32 - 1)
fs_hz = st.floats(1e6, 1e11)
q_values = st.floats(1.0, 1e5)
k2_values = st.floats(1e-6, 0.99)
c0_values = st.floats(1e-17, 1e-9)


def model_from(draw):
    branches = [MotionalBranch(f"m{k}", *b) for k, b in enumerate(draw["branches"])]
    return ResonatorModel(c0=draw["c0"], rs=draw["rs"], ls=draw["ls"], branches=branches)


class TestMbvd:
    @given(fs=fs_hz, q=q_values, k2=k2_values, c0=c0_values)
    def test_branch_rlc_round_trip(self, fs, q, k2, c0):
        b = MotionalBranch("x", fs, q, k2)
        back = rlc_to_branch(branch_to_rlc(b, c0), c0)
        assert back.fs == pytest.approx(fs, rel=1e-9)
        assert back.q == pytest.approx(q, rel=1e-9)
        assert back.k2 == pytest.approx(k2, rel=1e-9)

    @given(fs=fs_hz, q=q_values, k2=k2_values, c0=c0_values)
    def test_rlc_matches_closed_form(self, fs, q, k2, c0):
        rlc = branch_to_rlc(MotionalBranch("x", fs, q, k2), c0)
        want = rlc_from_table(fs, q, k2, c0)
        assert (rlc.rm, rlc.lm, rlc.cm) == pytest.approx(want, rel=1e-12)

    @given(seed=seeds)
    def test_passive_one_port(self, seed):
        rng = np.random.default_rng(seed)
        m = model_from(draw_resonator(rng))
        f = 10 ** rng.uniform(8, 11, 200)
        assert np.all(m.admittance(f).real > 0)

    @given(seed=seeds)
    def test_matches_scalar_oracle(self, seed):
        rng = np.random.default_rng(seed)
        d = draw_resonator(rng)
        m = model_from(d)
        f = rng.uniform(0.5e9, 12e9, 20)
        rlc = [rlc_from_table(fs, q, k2, d["c0"]) for fs, q, k2 in d["branches"]]
        want = np.array([mbvd_admittance(x, d["c0"], d["rs"], d["ls"], rlc) for x in f])
        np.testing.assert_allclose(m.admittance(f), want, rtol=1e-10)

    @given(seed=seeds, t_ref=st.floats(50, 1000), t_new=st.floats(50, 1000))
    def test_thickness_scale_keeps_q_and_k2(self, seed, t_ref, t_new):
        m = model_from(draw_resonator(np.random.default_rng(seed)))
        scaled = thickness_scale(m, t_ref, t_new)
        assert [b.q for b in scaled.branches] == [b.q for b in m.branches]
        assert [b.k2 for b in scaled.branches] == [b.k2 for b in m.branches]
        assert (scaled.c0, scaled.rs, scaled.ls) == (m.c0, m.rs, m.ls)
        for a, b in zip(scaled.branches, m.branches):
            assert a.fs == pytest.approx(b.fs * t_ref / t_new, rel=1e-15)

    @given(seed=seeds)
    def test_weak_branch_perturbs_little(self, seed):
        rng = np.random.default_rng(seed)
        m = model_from(draw_resonator(rng))
        extra_fs = rng.uniform(1e9, 10e9)
        assume(all(abs(b.fs - extra_fs) > 1e7 for b in m.branches))
        weak = m.with_branches(list(m.branches) + [MotionalBranch("w", extra_fs, 100.0, 1e-6)])
        f = np.linspace(0.5e9, 12e9, 400)
        # near the base model's own extrema |Y| -> 0 and any relative figure blows up
        lf, maxima, minima = brute_force_extrema(m.admittance, 0.4e9, 13e9, 20000)
        for x in [extra_fs] + list(10 ** lf[maxima]) + list(10 ** lf[minima]):
            f = f[np.abs(f - x) > 0.05 * x]
        assume(len(f) > 0)
        rel = np.abs(np.abs(weak.admittance(f)) / np.abs(m.admittance(f)) - 1)
        assert np.max(rel) < 1e-4


class TestNetwork:
    @given(seed=seeds)
    @settings(max_examples=40)
    def test_oracle_passivity_reciprocity(self, seed):
        rng = np.random.default_rng(seed)
        ladder = draw_ladder(rng)
        f = np.sort(rng.uniform(0.5e9, 12e9, 20))
        s = simulate(build_design(ladder), f)
        for i, x in enumerate(f):
            want = oracle_sparameters(ladder, x)
            got = (s.s11[i], s.s12[i], s.s21[i], s.s22[i])
            assert np.max(np.abs(np.subtract(got, want))) < 1e-9
        assert np.all(np.abs(s.s11) ** 2 + np.abs(s.s21) ** 2 <= 1 + 1e-9)
        assert np.all(np.abs(s.s22) ** 2 + np.abs(s.s12) ** 2 <= 1 + 1e-9)
        assert np.max(np.abs(s.s12 - s.s21)) < 1e-9

    @given(
        st.lists(
            st.tuples(st.sampled_from(["series", "shunt"]),
                      st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False)),
            min_size=1,
            max_size=6,
        )
    )
    def test_unit_determinant(self, elements):
        m = cascade([series_element(v) if k == "series" else shunt_element(v) for k, v in elements])
        scale = max(1.0, abs(m.a * m.d), abs(m.b * m.c))
        assert abs(m.det() - 1) <= 1e-9 * scale

    @given(seed=seeds)
    @settings(max_examples=20)
    def test_grid_refinement_pointwise(self, seed):
        rng = np.random.default_rng(seed)
        d = build_design(draw_ladder(rng))
        coarse = np.linspace(1e9, 10e9, 51)
        fine = np.linspace(1e9, 10e9, 101)
        a, b = simulate(d, coarse), simulate(d, fine)
        np.testing.assert_array_equal(a.s21, b.s21[::2])
        np.testing.assert_array_equal(a.s11, b.s11[::2])

    @given(z=st.complex_numbers(max_magnitude=1e4, allow_nan=False).filter(lambda z: z.real >= 0))
    def test_series_element_closed_form(self, z):
        s11, s12, s21, s22 = abcd_to_s(series_element(z), 50.0)
        assert s21 == pytest.approx(2 * 50 / (2 * 50 + z), abs=1e-12)
        assert s11 == pytest.approx(z / (2 * 50 + z), abs=1e-12)


def gaussian_trace(fc, width, il, f):
    db = -il - 3.0 * ((f - fc) / (width / 2)) ** 2
    s21 = 10 ** (db / 20) + 0j
    zero = np.zeros_like(s21)
    return SParameters(f, zero, s21, s21, zero)


class TestMetrics:
    @given(fc=st.floats(15e9, 25e9), fbw=st.floats(0.02, 0.2), il=st.floats(0.0, 10.0), g=st.floats(0.01, 1.0))
    def test_record_invariants_and_scaling(self, fc, fbw, il, g):
        f = np.linspace(5e9, 35e9, 3001)
        s = gaussian_trace(fc, fbw * fc, il, f)
        try:
            m = extract_metrics(s, thresholds=())
        except MetricsError:
            assume(False)
        assert m.f_lo_3db < m.f_center < m.f_hi_3db
        assert m.il_db >= 0
        assert m.fbw_3db == pytest.approx((m.f_hi_3db - m.f_lo_3db) / m.f_center, rel=1e-14)
        t = SParameters(s.f, s.s11, g * s.s12, g * s.s21, s.s22)
        n = extract_metrics(t, thresholds=())
        shift = -20 * math.log10(g)
        assert n.il_db - m.il_db == pytest.approx(shift, abs=1e-9)
        assert n.rej_low_db - m.rej_low_db == pytest.approx(shift, abs=1e-6)
        assert n.rej_high_db - m.rej_high_db == pytest.approx(shift, abs=1e-6)
        assert n.f_center == pytest.approx(m.f_center, rel=1e-9)
        assert n.fbw_3db == pytest.approx(m.fbw_3db, rel=1e-9)

    @given(fc=st.floats(15e9, 25e9), fbw=st.floats(0.02, 0.2), il=st.floats(0.0, 10.0))
    @settings(max_examples=30)
    def test_grid_refinement(self, fc, fbw, il):
        a = extract_metrics(gaussian_trace(fc, fbw * fc, il, np.linspace(5e9, 35e9, 3001)), thresholds=())
        b = extract_metrics(gaussian_trace(fc, fbw * fc, il, np.linspace(5e9, 35e9, 6001)), thresholds=())
        assert abs(a.il_db - b.il_db) < 0.01
        assert a.f_lo_3db == pytest.approx(b.f_lo_3db, rel=1e-3)
        assert a.f_hi_3db == pytest.approx(b.f_hi_3db, rel=1e-3)


class TestFitting:
    @given(seed=seeds)
    @settings(max_examples=6)
    def test_self_consistency(self, seed):
        rng = np.random.default_rng(seed)
        fs = rng.uniform(0.8e9, 1.5e9)
        m = ResonatorModel(
            c0=float(10 ** rng.uniform(-13, -12)),
            rs=float(rng.uniform(0.1, 3.0)),
            branches=[MotionalBranch("m1", fs, float(rng.uniform(50, 1000)), float(rng.uniform(0.02, 0.3)))],
        )
        trace = AdmittanceTrace.from_model(m, np.linspace(0.4e9, 3e9, 801))
        r = fit_mbvd(trace, 1)
        assert 0 <= r.residual < 1e-4
        assert r.residual <= r.initial_residual
        assert r.residual == pytest.approx(log_magnitude_residual(r.model, trace), rel=1e-12, abs=1e-300)
        assert r.model.c0 == pytest.approx(m.c0, rel=0.01)
        assert r.model.rs == pytest.approx(m.rs, rel=0.01)
        for name in ("fs", "q", "k2"):
            assert getattr(r.model.branches[0], name) == pytest.approx(getattr(m.branches[0], name), rel=0.01)


class TestOptimizerVariables:
    STAGES = (Stage("series", "a"), Stage("shunt", "b"), Stage("series", "a"))

    @given(fa=st.floats(0.95, 1.05), fb=st.floats(0.95, 1.05), ca=st.floats(0.5, 2.0), cb=st.floats(0.5, 2.0))
    def test_values_in_bounds(self, fa, fb, ca, cb):
        v = DesignVariables(self.STAGES, fs_scale={"a": fa, "b": fb}, c0_scale={"a": ca, "b": cb})
        for key, value in v.values().items():
            lo, hi = v.bounds[key]
            assert lo <= value <= hi
        assert v.with_values(v.values()) == v

    @given(x=st.floats(1.0501, 10.0) | st.floats(0.01, 0.9499))
    def test_out_of_bounds_rejected(self, x):
        with pytest.raises(ValueError):
            DesignVariables(self.STAGES, fs_scale={"a": x})

    @given(perm=st.permutations(list(range(3))))
    def test_ordering_is_permutation(self, perm):
        v = DesignVariables(self.STAGES)
        w = v.with_stages([self.STAGES[i] for i in perm])
        assert sorted(w.stages, key=repr) == sorted(v.stages, key=repr)


cells = st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e3, allow_nan=False, allow_infinity=False)


class TestFormats:
    @given(
        data=st.lists(st.tuples(cells, cells, cells, cells), min_size=1, max_size=8),
        start=st.floats(1e3, 1e11),
        fmt=st.sampled_from(["RI", "MA", "DB"]),
        unit=st.sampled_from(["Hz", "kHz", "MHz", "GHz"]),
        r=st.floats(1e-3, 1e4),
    )
    def test_touchstone_round_trip(self, data, start, fmt, unit, r):
        f = start * (1 + 0.01 * np.arange(len(data)))
        mats = np.array([[[a, c], [b, d]] for a, b, c, d in data], dtype=complex)
        doc = TouchstoneDocument(f, mats, fmt=fmt, freq_unit=unit, r_ref=r)
        back = read_touchstone(write_touchstone(doc))
        assert (back.fmt, back.freq_unit, back.parameter) == (fmt, unit, "S")
        assert back.r_ref == pytest.approx(r, rel=1e-5)
        np.testing.assert_allclose(back.frequencies, f, rtol=5e-9, atol=0)
        np.testing.assert_allclose(np.abs(back.data), np.abs(mats), rtol=5e-9, atol=0)
        if fmt == "RI":
            np.testing.assert_allclose(back.data.real, mats.real, rtol=5e-9, atol=0)
            np.testing.assert_allclose(back.data.imag, mats.imag, rtol=5e-9, atol=0)
        else:
            np.testing.assert_allclose(back.data, mats, rtol=5e-9, atol=0)

    @given(st.text(max_size=300))
    def test_touchstone_parser_is_total(self, text):
        try:
            read_touchstone(text)
        except ParseError as exc:
            assert exc.line is None or exc.line >= 1
        except ValueError as exc:
            pytest.fail(f"non-positioned error escaped: {exc!r}")

    @given(
        st.lists(st.sampled_from(["# GHz S RI R 50", "# MHz S MA", "! c", "1 0 0", "2 1 0 0 0 0 0 1 0",
                                  "3 0.5 45", "x", "", "# HZ Z DB R 75", "2 0 0"]), max_size=8)
    )
    def test_touchstone_errors_are_positioned(self, lines):
        try:
            read_touchstone("\n".join(lines))
        except ParseError as exc:
            if "no data rows" not in str(exc):
                assert exc.line is not None and exc.column is not None

    @given(seed=seeds)
    def test_design_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        models = {f"res{i}": model_from(draw_resonator(rng)) for i in range(int(rng.integers(1, 4)))}
        doc = read_design(fragment_to_bytes(models))
        for name, m in models.items():
            got = doc.resonators[name]
            assert got.c0 == pytest.approx(m.c0, rel=1e-11)
            assert got.rs == pytest.approx(m.rs, rel=1e-11, abs=1e-300)
            assert got.ls == pytest.approx(m.ls, rel=1e-11, abs=1e-300)
            for a, b in zip(got.branches, m.branches):
                assert (a.fs, a.q, a.k2) == pytest.approx((b.fs, b.q, b.k2), rel=1e-11)
        once = write_design(doc)
        assert write_design(read_design(once)) == once

    @given(st.text(max_size=200))
    def test_design_parser_is_total(self, text):
        try:
            read_design(text)
        except SchemaError:
            pass

    def test_design_document_default(self):
        assert DesignDocument({}).stages == ()
