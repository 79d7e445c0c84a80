import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lossbetti.bounds import (
    APPENDIX_PAIRS,
    BoundResult,
    appendix_explicit_bound,
    bound_from_parts,
    int_to_decimal,
    regime_summary,
    sweep_rows,
    zell_bound,
)
from lossbetti.pfaffian import (
    LossSpec,
    PfaffianFormat,
    apply_l2,
    apply_skip_connections,
    corollary_published_format,
    total_params_uniform,
)


def oracle(alpha, beta, ell, n):
    """Plain-int evaluation, no shortcuts."""
    return 2 ** (ell * (ell - 1) // 2) * (n * beta + min(n, ell) * alpha) ** (n + ell)


class TestZell:
    def test_empty_chain(self):
        r = zell_bound(PfaffianFormat(1, 1, 0), 1)
        assert r.exact == 1 and r.log2_value == 0.0

    def test_small(self):
        assert zell_bound(PfaffianFormat(2, 1, 1), 2).exact == 64

    def test_frozen_value(self):
        r = zell_bound(PfaffianFormat(2, 4, 3), 10)
        assert r.exact == 8 * 46 ** 13
        assert r.log2_value == pytest.approx(74.80631, abs=1e-5)
        assert (r.two_power_exponent, r.base, r.exponent) == (3, 46, 13)

    def test_all_zero_format(self):
        r = zell_bound(PfaffianFormat(0, 0, 0), 3)
        assert r.exact == 0 and r.log2_value == -math.inf
        assert r.exceeds_or_equals(0) and not r.exceeds_or_equals(1)

    def test_rejects_nonpositive_params(self):
        with pytest.raises(ValueError):
            zell_bound(PfaffianFormat(1, 1, 1), 0)

    @given(st.integers(0, 12), st.integers(0, 12), st.integers(0, 30), st.integers(1, 40))
    def test_matches_plain_int_oracle(self, a, b, ell, n):
        r = zell_bound(PfaffianFormat(a, b, ell), n)
        assert r.exact == oracle(a, b, ell, n)
        if r.exact > 0:
            assert r.log2_value == pytest.approx(math.log2(r.exact), rel=1e-12, abs=1e-9)

    @given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 20), st.integers(1, 30),
           st.sampled_from(["alpha", "beta", "ell", "n"]))
    def test_monotone_in_each_argument(self, a, b, ell, n, which):
        lo = zell_bound(PfaffianFormat(a, b, ell), n).exact
        bumped = dict(a=a, b=b, ell=ell, n=n)
        key = {"alpha": "a", "beta": "b", "ell": "ell", "n": "n"}[which]
        bumped[key] += 1
        hi = zell_bound(PfaffianFormat(bumped["a"], bumped["b"], bumped["ell"]), bumped["n"]).exact
        assert hi >= lo


class TestCap:
    def test_suppression_keeps_log2(self):
        fmt = PfaffianFormat(8, 1, 200)
        full = zell_bound(fmt, 50)
        capped = zell_bound(fmt, 50, exact_bit_cap=1000)
        assert full.exact is not None and capped.exact is None and capped.suppressed
        assert capped.log2_value == full.log2_value
        d = capped.to_dict()
        assert d["exact"] is None and d["exact_suppressed"] is True

    def test_exceeds_without_exact(self):
        capped = zell_bound(PfaffianFormat(8, 1, 200), 50, exact_bit_cap=10)
        assert capped.exceeds_or_equals(10 ** 100)

    def test_rejects_bad_cap(self):
        with pytest.raises(ValueError):
            bound_from_parts(1, 2, 3, 4, exact_bit_cap=0)

    def test_decimal_of_huge_integer(self):
        r = zell_bound(PfaffianFormat(10, 2, 300), 100)
        text = r.to_dict()["exact"]
        assert len(text) > 4300
        assert int_to_decimal(r.exact) == text and text[0] != "-"

    def test_json_fields(self):
        d = zell_bound(PfaffianFormat(2, 1, 1), 2).to_dict()
        assert d["exact"] == "64" and d["log2"] == 6.0
        assert d["assumptions"]["s"] == 1 and d["assumptions"]["n_prime"] == 2


class TestAppendix:
    def test_mse_linear_spot(self):
        r = appendix_explicit_bound("MSE", "linear", 1, 2, 3, 5)
        assert (r.base, r.exponent, r.two_power_exponent) == (91, 33, 190)
        assert r.exact == 2 ** 190 * 91 ** 33
        assert r.log2_value == pytest.approx(404.76, abs=0.01)

    def test_mse_linear_shallow(self):
        r = appendix_explicit_bound("MSE", "linear", 1, 3, 2, 2)
        assert (r.two_power_exponent, r.base, r.exponent) == (15, 40, 16)

    @pytest.mark.parametrize("bad", [dict(m=0), dict(h=0), dict(n0=0), dict(L=1)])
    def test_rejects_out_of_scope(self, bad):
        args = dict(n0=1, h=2, L=3, m=1)
        args.update(bad)
        with pytest.raises(ValueError):
            appendix_explicit_bound("MSE", "linear", **args)

    def test_bce_tanh_unsupported(self):
        with pytest.raises(ValueError):
            appendix_explicit_bound("BCE", "tanh", 1, 2, 3, 1)

    def test_accepts_loss_spec(self):
        a = appendix_explicit_bound(LossSpec("BCE"), "sigmoid", 1, 2, 3, 2)
        b = appendix_explicit_bound("BCE", "logsig", 1, 2, 3, 2)
        assert a == b

    @pytest.mark.parametrize("kind, last", APPENDIX_PAIRS)
    def test_pipeline_equality(self, kind, last):
        for L in range(2, 6):
            for h in range(1, 5):
                for m in range(1, 7):
                    for n0 in (1, 2):
                        fmt = corollary_published_format(kind, last, L, h, m)
                        n = total_params_uniform(n0, h, L)
                        assert appendix_explicit_bound(kind, last, n0, h, L, m).exact == \
                            zell_bound(fmt, n).exact

    def test_literal_mse_sigmoid_form_disagrees_with_general_bound(self):
        # the literal closed form for MSE with a sigmoid last layer does not
        # follow from the corollary format; the default reconciles it
        for L in (2, 3):
            literal = appendix_explicit_bound("MSE", "logsig", 1, 2, L, 3, literal=True)
            fixed = appendix_explicit_bound("MSE", "logsig", 1, 2, L, 3)
            assert literal.exact != fixed.exact


class TestInvariance:
    @given(st.integers(1, 20), st.integers(2, 20), st.integers(0, 40), st.integers(1, 50))
    def test_l2_no_change_when_beta_at_least_two(self, a, b, ell, n):
        f = PfaffianFormat(a, b, ell)
        assert zell_bound(apply_l2(f), n) == zell_bound(f, n)

    @given(st.integers(1, 20), st.integers(0, 40), st.integers(1, 50))
    def test_l2_raises_bound_when_beta_one(self, a, ell, n):
        f = PfaffianFormat(a, 1, ell)
        assert zell_bound(apply_l2(f), n).exact > zell_bound(f, n).exact

    @given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 40), st.integers(1, 50))
    def test_skip_identity(self, a, b, ell, n):
        f = PfaffianFormat(a, b, ell)
        assert zell_bound(apply_skip_connections(f), n) == zell_bound(f, n)


class TestRegime:
    def _h_label(self, L):
        return [r for r in regime_summary(4, L, 3) if r.variable == "h"][0]

    def test_deep_h(self):
        assert self._h_label(4).asymptotic_class == "O(h²)^{O(h²)}"

    def test_shallow_h(self):
        assert self._h_label(2).asymptotic_class == "O(h)^{O(h)}"

    def test_m_label_shared(self):
        deep = [r for r in regime_summary(4, 3, 3) if r.variable == "m"][0]
        shallow = [r for r in regime_summary(4, 2, 3) if r.variable == "m"][0]
        assert deep.asymptotic_class == shallow.asymptotic_class == "κ^{O(m²)}"
        assert deep.depth_class == "Deep" and shallow.depth_class == "Shallow"

    def test_l_label_only_when_deep(self):
        assert any(r.variable == "L" for r in regime_summary(2, 5, 1))
        assert not any(r.variable == "L" for r in regime_summary(2, 2, 1))

    def test_rejects_L1(self):
        with pytest.raises(ValueError):
            regime_summary(2, 1, 1)

    def test_log2_over_L_squared_bounded(self):
        vals = []
        for L in (8, 32, 128, 512):
            fmt = corollary_published_format("MSE", "linear", L, 3, 2)
            vals.append(zell_bound(fmt, total_params_uniform(1, 3, L), 1).log2_value / L ** 2)
        assert max(vals) <= 2 * min(vals)


class TestSweep:
    def test_rows_and_values(self):
        rows = sweep_rows([1, 2], [2], [3], [1], [("MSE", "linear")])
        assert len(rows) == 2
        fmt = corollary_published_format("MSE", "linear", 3, 2, 2)
        assert rows[1]["log2_bound"] == zell_bound(fmt, 13).log2_value
        assert rows[1]["alpha"] == 3

    def test_theorem_mode(self):
        rows = sweep_rows([5], [2], [3], [1], [("MSE", "linear")], mode="theorem")
        assert rows[0]["alpha"] == 5

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            sweep_rows([1], [1], [2], [1], mode="closed-form")


def test_bound_result_equality_ignores_assumption_dict():
    a = bound_from_parts(1, 2, 3, 4)
    b = BoundResult(a.exact, a.log2_value, 2, 3, 1, 4, assumptions={})
    assert a == b
