import random
from fractions import Fraction as F

import pytest

from contlog.errors import ValidationError
from contlog.formula import Relation, atom, signature
from contlog.oracle import (
    EXACT_STEP,
    PSEUDOMETRIC_LAWS,
    SUITES,
    FuzzConfig,
    fuzz,
    pseudometric_violation,
    random_metric_structure,
    random_signature,
    random_space,
    random_structure,
    run_coding_trials,
    run_corruption_trials,
    run_limit_trials,
    run_metric_violation_trials,
    run_quantifier_trials,
    run_quotient_trials,
    run_refinement_trials,
    run_roundtrip_trials,
    summarize,
    verify_coding,
    verify_corruption_detected,
    verify_quantifier_identity,
    verify_primordial_bounds,
)
from contlog.semantics import check_pseudometric, structure, zero_distance_classes
from contlog.translate import TranslationContext
from contlog.valuespace import make_finite, point


CFG = FuzzConfig(seed=20260816)


class TestConfig:
    def test_bounds(self):
        with pytest.raises(ValidationError, match="universe_size"):
            FuzzConfig(seed=1, universe_size=0)
        with pytest.raises(ValidationError, match="universe_size"):
            FuzzConfig(seed=1, universe_size=7)
        with pytest.raises(ValidationError, match="formula_depth"):
            FuzzConfig(seed=1, formula_depth=5)
        with pytest.raises(ValidationError, match="net_size"):
            FuzzConfig(seed=1, net_size=0)
        with pytest.raises(ValidationError, match="trials"):
            FuzzConfig(seed=1, trials=0)
        with pytest.raises(ValidationError, match="tol"):
            FuzzConfig(seed=1, tol=-1)
        with pytest.raises(ValidationError, match="seed"):
            FuzzConfig(seed="not-a-seed")

    def test_tol_coerced(self):
        assert FuzzConfig(seed=1, tol="1/8").tol == F(1, 8)


class TestGenerators:
    def test_spaces_land_on_the_exact_pool(self):
        rng = random.Random(7)
        for _ in range(20):
            X = random_space(rng, CFG)
            assert 1 <= len(X.net) <= CFG.net_size
            for p in X.net:
                assert p.coords[0].denominator in (1, 2, 4, 8)

    def test_grid_spaces_are_misaligned_intervals(self):
        rng = random.Random(7)
        for _ in range(20):
            X = random_space(rng, CFG, grid=True)
            assert X.net[0] == point(0) and X.net[-1] == point(1)

    def test_structures_are_total_and_on_net(self):
        rng = random.Random(3)
        sig = random_signature(rng, CFG)
        M = random_structure(CFG, sig, rng)
        for rel in sig.relations:
            tab = M.interp[rel.name]
            assert len(tab) == len(M.universe) ** rel.arity
            for v in tab.values():
                assert v in rel.space.net

    def test_metric_structures_pass_the_checker(self):
        for i in range(10):
            M = random_metric_structure(CFG, random.Random(i))
            assert check_pseudometric(M).ok

    def test_forced_classes_collapse(self):
        M = random_metric_structure(CFG, random.Random(5), force_classes=True)
        assert any(len(c) > 1 for c in zero_distance_classes(M))


class TestVerifiers:
    def setup_method(self):
        X = make_finite([point(0), point(F(1, 4)), point(F(3, 4))])
        self.sig = signature([Relation("P", 1, X)])
        self.M = structure(self.sig, ["a", "b"],
                           {"P": {"a": F(1, 4), "b": F(3, 4)}})

    def test_coding_on_aligned_instance(self):
        ctx = TranslationContext(self.sig, EXACT_STEP)
        phi = atom(self.sig, "P", "x")
        check = verify_coding(ctx, self.M, phi)
        assert check.ok and check.budget == 0 and check.max_difference == 0
        assert check.checked == 2  # one per assignment of x

    def test_quantifier_identity_by_hand(self):
        body = atom(self.sig, "P", "q")
        check = verify_quantifier_identity(self.M, body)
        assert check.ok and check.checked == 1
        assert verify_primordial_bounds(self.M, body).ok

    def test_identity_needs_a_lone_variable(self):
        from contlog.connective import max_of
        from contlog.formula import Apply

        u = self.sig.by_name["P"].space
        two_frees = Apply(max_of(u, u),
                          (atom(self.sig, "P", "q"), atom(self.sig, "P", "r")))
        with pytest.raises(ValidationError, match="pass var="):
            verify_quantifier_identity(self.M, two_frees)
        # naming the variable resolves the ambiguity
        assert verify_quantifier_identity(self.M, two_frees, var="q").ok

    def test_corruption_is_detected(self):
        ctx = TranslationContext(self.sig, EXACT_STEP)
        phi = atom(self.sig, "P", "x")
        check = verify_corruption_detected(ctx, self.M, phi)
        assert check.ok  # ok == the planted shift was caught
        assert check.witness is not None and "shift" in check.witness


class TestDrivers:
    def test_each_driver_runs_clean(self):
        cfg = FuzzConfig(seed=11, trials=8)
        for run in (run_coding_trials, run_quantifier_trials,
                    run_roundtrip_trials, run_corruption_trials,
                    run_metric_violation_trials, run_quotient_trials,
                    run_refinement_trials, run_limit_trials):
            records = run(cfg)
            bad = [r for r in records if not r.ok]
            assert not bad, (run.__name__, bad[0].as_json() if bad else None)

    def test_grid_coding_runs_clean(self):
        records = run_coding_trials(FuzzConfig(seed=12, trials=8), grid=True)
        assert all(r.ok for r in records)

    def test_trials_override(self):
        assert len(run_roundtrip_trials(CFG, trials=3)) == 3

    def test_determinism(self):
        a = run_coding_trials(FuzzConfig(seed=99, trials=5))
        b = run_coding_trials(FuzzConfig(seed=99, trials=5))
        assert [r.as_json() for r in a] == [r.as_json() for r in b]

    def test_records_shape(self):
        r = run_quantifier_trials(CFG, trials=1)[0]
        doc = r.as_json()
        assert doc["kind"] == "quantifier" and doc["trial"] == 0
        assert set(doc) >= {"kind", "trial", "ok", "detail", "sizes"}
        assert "witness" not in doc  # only failures carry one here

    def test_quantifier_checks_split(self):
        both = run_quantifier_trials(CFG, trials=4)
        ident = run_quantifier_trials(CFG, trials=4, checks=("identity",))
        prim = run_quantifier_trials(CFG, trials=4, checks=("primordial",))
        assert all(r.ok for r in both + ident + prim)
        # same instances underneath: the size fingerprints agree
        assert [r.sizes for r in ident] == [r.sizes for r in both]
        assert [r.sizes for r in prim] == [r.sizes for r in both]

    def test_quantifier_checks_must_name_one(self):
        with pytest.raises(ValidationError, match="no known checks"):
            run_quantifier_trials(CFG, trials=1, checks=("typo",))


class TestPlantedViolations:
    @pytest.mark.parametrize("law", PSEUDOMETRIC_LAWS)
    def test_each_law_is_caught_by_name(self, law):
        for i in range(5):
            M, named = pseudometric_violation(CFG, random.Random(i), law)
            assert named == law
            report = check_pseudometric(M)
            assert not report.ok
            assert any(f.startswith(law) for f in report.failures), report.failures

    def test_unknown_law(self):
        with pytest.raises(ValidationError, match="unknown pseudometric law"):
            pseudometric_violation(CFG, random.Random(0), "frobnication")


class TestSuiteRunner:
    def test_every_suite_gets_a_slice(self):
        cfg = FuzzConfig(seed=5, trials=len(SUITES))
        records = fuzz(cfg)
        assert {r.kind for r in records} == {name for name, _, _ in SUITES}
        assert len(records) == cfg.trials

    def test_weighted_split(self):
        cfg = FuzzConfig(seed=5, trials=10)
        records = fuzz(cfg, kinds=["coding-exact", "quantifier"])
        counts = summarize(records)["by_kind"]
        assert counts["coding-exact"]["trials"] == 6  # 10 * 30 // 50
        assert counts["quantifier"]["trials"] == 4

    def test_unknown_suite(self):
        with pytest.raises(ValidationError, match="no such suites"):
            fuzz(CFG, kinds=["nonsense"])

    def test_summary_shape(self):
        records = fuzz(FuzzConfig(seed=5, trials=10), kinds=["roundtrip"])
        s = summarize(records)
        assert s["trials"] == 10 and s["failures"] == 0
        assert s["by_kind"]["roundtrip"] == {"trials": 10, "failures": 0}
