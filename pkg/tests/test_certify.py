import json
import random
from fractions import Fraction
from itertools import combinations

import pytest

from permforce.certify import (
    ALL_ONE,
    COROLLARY,
    INCONCLUSIVE,
    INDEPENDENT,
    KERNEL_RESTRICTED,
    ZERO_COMBO,
    CertificateError,
    WitnessError,
    auto_certify,
    certify_non_forcing,
    check_evidence,
    check_witness_vector,
    classify_quadruple,
    default_grid_size,
    enumerate_allone_quadruples,
    enumerate_zerocombo_quadruples,
    inertia_by_charpoly,
    latin_squares,
    listed_allone_quadruples,
    listed_zerocombo_quadruples,
    load_data,
    witness_from_zero,
)
from permforce.linalg import RatMatrix, inertia
from permforce.perms import dihedral_orbit, enumerate_Sk, parse_permutation
from permforce.perturbation import PerturbationPoint, grad_poly_dependence, h_value


def test_classify_examples():
    assert classify_quadruple(["1234", "2143", "3412", "4321"]).tag == ALL_ONE
    zc = classify_quadruple(["2143", "3412", "2413", "3142"])
    assert zc.tag == ZERO_COMBO and zc.witness == (1, 1, -1, -1)
    assert classify_quadruple(["1234", "1243", "1324", "1342"]).tag == INDEPENDENT


@pytest.mark.parametrize("bad", [["1234", "2143", "3412"], ["1234", "1234", "2143", "4321"], ["123", "2143", "3412", "4321"]])
def test_classify_rejects_malformed(bad):
    with pytest.raises(ValueError):
        classify_quadruple(bad)


def test_latin_squares_and_lists():
    assert len(latin_squares(4)) == 576
    e = enumerate_allone_quadruples()
    assert (e.latin_squares, e.quadruples, len(e.classes)) == (576, 24, 12)
    assert list(e.classes) == listed_allone_quadruples()
    assert list(enumerate_zerocombo_quadruples()) == listed_zerocombo_quadruples()


def test_trichotomy_is_exhaustive_on_a_sample():
    # dependent gradient polynomials occur exactly for the two structured classes
    r = random.Random(3)
    S4 = enumerate_Sk(4)
    for q in [r.sample(S4, 4) for _ in range(40)] + [list(x) for x in listed_allone_quadruples()]:
        tag = classify_quadruple(q).tag
        assert grad_poly_dependence(q).independent == (tag == INDEPENDENT)


def test_classes_closed_under_symmetry():
    for q in listed_allone_quadruples():
        for image in dihedral_orbit(q):
            assert classify_quadruple(image).tag == ALL_ONE


def test_certify_all_one_corollary():
    ev = certify_non_forcing(["1234", "2143", "3421", "4312"], 7)
    assert ev.verdict == COROLLARY
    assert ev.full_inertia.n_pos >= 4 and ev.full_inertia.n_neg >= 4
    assert check_evidence(json.loads(json.dumps(ev.to_json()))) == []


def test_certify_kernel_restricted_case():
    q = ["1432", "2341", "3214", "4123"]
    ev = certify_non_forcing(q, 4)
    assert ev.verdict == KERNEL_RESTRICTED
    assert ev.full_inertia.as_tuple() == (8, 0, 1)
    assert ev.w_plus.value > 0 > ev.w_minus.value
    assert check_evidence(ev.to_json()) == []


def test_tabulated_negative_witness_vector():
    w = [-23, 42, -23, 128, 112, 128, 0, 8, 0]
    value, orth = check_witness_vector(["1432", "2341", "3214", "4123"], 4, [1, 1, 1, 1], w)
    assert value == -115456 and orth


def test_negative_control_positive_definite():
    ev = certify_non_forcing(["1234", "2143", "3412", "4321"], 5)
    assert ev.verdict == INCONCLUSIVE
    assert ev.full_inertia.as_tuple() == (16, 0, 0)


def test_certify_errors():
    with pytest.raises(CertificateError, match="too small"):
        certify_non_forcing(["1234", "2143", "3412", "4321"], 3)
    with pytest.raises(CertificateError, match="independent"):
        certify_non_forcing(["1234", "1243", "1324", "1342"], 4)
    with pytest.raises(CertificateError):
        certify_non_forcing(["1234", "2143", "3412", "4321"], 4, signs="+-+-")
    with pytest.raises(CertificateError, match="not zero"):
        certify_non_forcing(["2143", "3412", "2413", "3142"], 4, signs="++++")


def test_auto_certify_stops_at_first_certificate():
    q = listed_allone_quadruples()[1]
    ev = auto_certify(q, "++++")
    assert ev.verdict != INCONCLUSIVE
    assert ev.n <= default_grid_size(q)
    assert certify_non_forcing(q, default_grid_size(q), "++++").verdict == COROLLARY
    controls = auto_certify(["1234", "2143", "3412", "4321"], "++++", sizes=(4, 5))
    assert controls.verdict == INCONCLUSIVE and controls.n == 5


def test_check_evidence_detects_tampering():
    ev = certify_non_forcing(["1432", "2341", "3214", "4123"], 4).to_json()
    bad = json.loads(json.dumps(ev))
    bad["alpha"] = ["1", "1", "1", "2"]
    assert any("alpha" in p for p in check_evidence(bad))
    bad = json.loads(json.dumps(ev))
    bad["w_minus"]["value"] = "-1"
    assert any("w_minus" in p for p in check_evidence(bad))
    bad = json.loads(json.dumps(ev))
    bad["full_inertia"] = {"n_pos": 9, "n_zero": 0, "n_neg": 0}
    assert any("inertia" in p for p in check_evidence(bad))


def test_charpoly_inertia_matches_congruence():
    r = random.Random(11)
    for _ in range(30):
        n = r.randint(1, 6)
        M = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                M[i][j] = M[j][i] = Fraction(r.randint(-4, 4), r.randint(1, 3))
        # rank-deficient cases too
        if r.random() < 0.3 and n > 1:
            M[-1] = list(M[0])
            for i in range(n):
                M[i][-1] = M[i][0]
        S = RatMatrix(M)
        assert inertia_by_charpoly(S) == inertia(S)


def test_witness_from_zero_errors():
    with pytest.raises(WitnessError, match="uniform"):
        witness_from_zero(["12"], PerturbationPoint.zero(3))
    with pytest.raises(WitnessError, match="1/4"):
        witness_from_zero(["12"], PerturbationPoint.unit(3, 1, "1/2"))
    with pytest.raises(WitnessError) as err:
        witness_from_zero(["1", "123"], PerturbationPoint.unit(3, 1, "1/8"))
    assert err.value.index == 1 and err.value.value == h_value("123", PerturbationPoint.unit(3, 1, "1/8"))


def test_witness_from_zero_positive_path():
    # rows 1 and 3 of B(x) coincide, so the permuton is symmetric under reversal
    a = Fraction(1, 5)
    p = PerturbationPoint(3, [a, 0, -a, 0])
    rec = witness_from_zero(["12", "21"], p)
    assert not rec.permuton.is_uniform()
    assert rec.nonuniform_index == 1
    assert rec.densities[parse_permutation("12")] == Fraction(1, 2)
