from fractions import Fraction as F

import pytest

from contlog.connective import identity, min_of, neg
from contlog.errors import EvalError, ValidationError
from contlog.hyperspace import sup_theta
from contlog.formula import (
    Apply,
    Atomic,
    Quant,
    QuantKind,
    Relation,
    atom,
    cauchy_limit,
    parse,
    signature,
)
from contlog.hyperspace import CompactSet, compact
from contlog.semantics import (
    check_condition,
    check_function_axioms,
    check_pseudometric,
    decode_function,
    encode_function,
    eval_error_bound,
    evaluate,
    quotient,
    structure,
    zero_distance_classes,
)
from contlog.valuespace import make_finite, make_interval, point

G = make_interval(0, 1, F(1, 4), label="G")
SIG = signature([Relation("P", 1, G)])
M = structure(SIG, ["a", "b"], {"P": {"a": F(1, 4), "b": F(3, 4)}})


def metric_structure(values=(0, F(1, 2), F(1, 2))):
    D = make_interval(0, 1, F(1, 8))
    sig = signature([Relation("d", 2, D), Relation("R", 1, D)],
                    distance_symbol="d", moduli={"R": 1})
    names = ["a", "b", "c"][: len(values)]
    placement = dict(zip(names, map(F, values)))
    d_tab = {(x, y): abs(placement[x] - placement[y]) for x in names for y in names}
    r_tab = {x: placement[x] for x in names}
    return structure(sig, names, {"d": d_tab, "R": r_tab})


class TestStructure:
    def test_value_lookup(self):
        assert M.value("P", "a") == point(F(1, 4))

    def test_totality_enforced(self):
        with pytest.raises(ValidationError, match="not total"):
            structure(SIG, ["a", "b"], {"P": {"a": F(1, 4)}})

    def test_values_must_sit_near_net(self):
        exact = signature([Relation("P", 1, make_finite([point(0), point(1)]))])
        with pytest.raises(ValidationError, match="not within resolution"):
            structure(exact, ["a"], {"P": {"a": F(1, 2)}})

    def test_bad_element_ids(self):
        for bad in ("", "a,b", " a"):
            with pytest.raises(ValidationError):
                structure(SIG, [bad], {"P": {bad: 0}})

    def test_interp_keys_must_match(self):
        with pytest.raises(ValidationError):
            structure(SIG, ["a"], {"Wrong": {"a": 0}})

    def test_comma_keys_normalized(self):
        sig = signature([Relation("E", 2, G)])
        N = structure(sig, ["a", "b"], {"E": {
            "a,a": 0, "a,b": 1, "b,a": 1, "b,b": 0}})
        assert N.value("E", "a", "b") == point(1)


class TestEvaluate:
    def test_atomic_with_assignment(self):
        res = evaluate(M, atom(SIG, "P", "x"), {"x": "b"})
        assert res.scalar == F(3, 4)

    def test_unassigned_variable(self):
        with pytest.raises(EvalError):
            evaluate(M, atom(SIG, "P", "x"))

    def test_unknown_element(self):
        with pytest.raises(EvalError):
            evaluate(M, atom(SIG, "P", "x"), {"x": "zz"})

    def test_sup_inf(self):
        assert evaluate(M, parse("sup x. P(x)", SIG)).scalar == F(3, 4)
        assert evaluate(M, parse("inf x. P(x)", SIG)).scalar == F(1, 4)

    def test_connectives(self):
        lib = {"neg": neg(G), "min": min_of(G, G)}
        phi = parse("min(P(x), neg(P(x)))", SIG, lib)
        assert evaluate(M, phi, {"x": "b"}).scalar == F(1, 4)

    def test_set_quantifier_collects_values(self):
        res = evaluate(M, parse("Q x. P(x)", SIG))
        assert isinstance(res.value, CompactSet)
        assert res.value.members == (point(F(1, 4)), point(F(3, 4)))

    def test_set_then_sup_theta(self):
        phi = Apply(sup_theta(identity(G)), (parse("Q x. P(x)", SIG),))
        assert evaluate(M, phi).scalar == F(3, 4)

    def test_scalar_rejects_sets(self):
        res = evaluate(M, parse("Q x. P(x)", SIG))
        with pytest.raises(EvalError):
            res.scalar

    def test_cauchy_limit_evaluates_as_truncation(self):
        formulas = [parse("inf x. P(x)", SIG), parse("sup x. P(x)", SIG)]
        lim = cauchy_limit([F(1, 2), F(0)], formulas, 0)
        assert lim.index == 1
        assert evaluate(M, lim).scalar == F(3, 4)


class TestErrorBound:
    def test_atomic_bound_is_resolution(self):
        assert eval_error_bound(atom(SIG, "P", "x")) == F(1, 8)

    def test_apply_bound_compounds(self):
        # L * (sum of child bounds) + codomain resolution
        phi = Apply(min_of(G, G), (atom(SIG, "P", "x"), atom(SIG, "P", "y")))
        assert eval_error_bound(phi) == 1 * (F(1, 8) + F(1, 8)) + F(1, 8)

    def test_exact_spaces_have_zero_bound(self):
        E = make_finite([point(0), point(F(1, 2)), point(1)])
        sig = signature([Relation("R", 1, E)])
        phi = Quant(QuantKind.SUP, "x", atom(sig, "R", "x"))
        assert eval_error_bound(phi) == 0

    def test_set_quantifier_adds_body_resolution(self):
        body = atom(SIG, "P", "x")
        assert eval_error_bound(Quant(QuantKind.SET, "x", body)) == F(1, 8) + F(1, 8)

    def test_result_carries_bound(self):
        assert evaluate(M, parse("sup x. P(x)", SIG)).error_bound == F(1, 8)


class TestPseudometric:
    def test_metric_structure_passes(self):
        assert check_pseudometric(metric_structure()).ok

    def test_needs_distance_symbol(self):
        with pytest.raises(ValidationError):
            check_pseudometric(M)

    def test_reflexivity_violation(self):
        N = metric_structure()
        tables = {n: dict(t) for n, t in N.interp.items()}
        tables["d"][("a", "a")] = point(F(1, 4))
        broken = structure(N.signature, list(N.universe), tables)
        report = check_pseudometric(broken)
        assert not report.ok
        assert any(f.startswith("reflexivity") for f in report.failures)

    def test_symmetry_violation(self):
        N = metric_structure()
        tables = {n: dict(t) for n, t in N.interp.items()}
        tables["d"][("a", "b")] = point(F(1, 4))
        broken = structure(N.signature, list(N.universe), tables)
        assert any(f.startswith("symmetry")
                   for f in check_pseudometric(broken).failures)

    def test_triangle_violation(self):
        N = metric_structure((0, F(1, 8), F(1, 4)))
        tables = {n: dict(t) for n, t in N.interp.items()}
        tables["d"][("a", "c")] = point(1)
        tables["d"][("c", "a")] = point(1)
        broken = structure(N.signature, list(N.universe), tables)
        assert any(f.startswith("triangle")
                   for f in check_pseudometric(broken).failures)

    def test_modulus_violation(self):
        N = metric_structure()
        tables = {n: dict(t) for n, t in N.interp.items()}
        tables["R"][("b",)] = point(0)
        tables["R"][("c",)] = point(1)  # zero-distance pair, different values
        broken = structure(N.signature, list(N.universe), tables)
        assert any(f.startswith("modulus")
                   for f in check_pseudometric(broken).failures)

    def test_tolerance_forgives(self):
        N = metric_structure()
        tables = {n: dict(t) for n, t in N.interp.items()}
        tables["d"][("a", "a")] = point(F(1, 8))
        broken = structure(N.signature, list(N.universe), tables)
        assert not check_pseudometric(broken).ok
        assert check_pseudometric(broken, tol=F(1, 8)).ok


class TestQuotient:
    def test_classes_and_reps(self):
        N = metric_structure()  # b and c sit at distance 0
        assert zero_distance_classes(N) == (("a",), ("b", "c"))
        Z = quotient(N)
        assert Z.universe == ("a", "b")  # first element of each class
        assert Z.value("R", "b") == N.value("R", "b")
        assert Z.distance("a", "b") == N.distance("a", "b")

    def test_quotient_is_a_metric(self):
        Z = quotient(metric_structure())
        report = check_pseudometric(Z)
        assert report.ok
        assert zero_distance_classes(Z) == (("a",), ("b",))

    def test_requires_pseudometric(self):
        N = metric_structure()
        tables = {n: dict(t) for n, t in N.interp.items()}
        tables["d"][("a", "b")] = point(F(1, 4))
        broken = structure(N.signature, list(N.universe), tables)
        with pytest.raises(ValidationError):
            quotient(broken)

    def test_evaluation_commutes(self):
        N = metric_structure()
        Z = quotient(N)
        phi_n = parse("sup x. R(x)", N.signature)
        phi_z = parse("sup x. R(x)", Z.signature)
        assert evaluate(N, phi_n).scalar == evaluate(Z, phi_z).scalar


class TestFunctions:
    def test_encode_decode_roundtrip(self):
        N = metric_structure((0, F(1, 2), 1))
        f = {"a": "b", "b": "c", "c": "c"}
        N2 = encode_function(N, "f", f)
        assert N2.value("f", "a", "b") == point(0)
        assert N2.value("f", "a", "a").scalar == N.distance("b", "a")
        assert N2.value("f", "a", "c").scalar == N.distance("b", "c")
        assert check_function_axioms(N2, "f").ok
        decoded = decode_function(N2, "f")
        assert decoded == {("a",): "b", ("b",): "c", ("c",): "c"}

    def test_modulus_is_function_constant_plus_one(self):
        N = metric_structure((0, F(1, 2), 1))
        N2 = encode_function(N, "f", {"a": "b", "b": "c", "c": "c"})
        # f moves a,b (distance 1/2) to b,c (distance 1/2): constant 1
        assert N2.signature.modulus("f") == 2

    def test_declared_modulus_checked(self):
        N = metric_structure((0, F(1, 2), 1))
        with pytest.raises(ValidationError, match="violated"):
            encode_function(N, "f", {"a": "c", "b": "b", "c": "c"},
                            modulus=F(1, 2))

    def test_table_validation(self):
        N = metric_structure()
        with pytest.raises(ValidationError, match="not total"):
            encode_function(N, "f", {"a": "b"})
        with pytest.raises(ValidationError, match="unknown element"):
            encode_function(N, "f", {"a": "zz", "b": "a", "c": "a"})
        with pytest.raises(ValidationError, match="already exists"):
            encode_function(N, "R", {"a": "a", "b": "b", "c": "c"})
        with pytest.raises(ValidationError, match="distance"):
            encode_function(M, "f", {"a": "a", "b": "b"})

    def test_axioms_detect_non_function(self):
        N = metric_structure((0, F(1, 2), 1))
        N2 = encode_function(N, "f", {"a": "b", "b": "c", "c": "c"})
        tables = {n: dict(t) for n, t in N2.interp.items()}
        for y in N2.universe:  # row "a" never reaches zero
            tables["f"][("a", y)] = point(1)
        broken = structure(N2.signature, list(N2.universe), tables)
        report = check_function_axioms(broken, "f")
        assert not report.ok
        assert any("totality" in f for f in report.failures)


class TestCheckCondition:
    def test_hit_and_miss_on_exact_space(self):
        E = make_finite([point(0), point(F(1, 2)), point(1)])
        sig = signature([Relation("R", 1, E)])
        N = structure(sig, ["a", "b"], {"R": {"a": F(1, 2), "b": 1}})
        phi = parse("sup x. R(x)", sig)
        assert check_condition(N, phi, point(1)).ok
        report = check_condition(N, phi, point(0))
        assert not report.ok
        assert report.distance == 1

    def test_tolerance_and_multiple_targets(self):
        phi = parse("sup x. P(x)", SIG)
        report = check_condition(M, phi, [point(F(1, 2)), point(1)])
        assert report.distance == F(1, 4)
        assert not report.ok  # bound 1/8 < distance 1/4
        assert check_condition(M, phi, [point(F(1, 2))], tol=F(1, 8)).ok

    def test_set_valued_target(self):
        phi = parse("Q x. P(x)", SIG)
        want = compact(G, point(F(1, 4)), point(F(3, 4)))
        assert check_condition(M, phi, want).ok
