"""Acceptance criteria 1-9, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line with the evidence
behind the verdict.  Criteria 7 and 8 contain printed values that do not hold
exactly; those tests fail and say which items are responsible.
"""
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from permforce import certify as cert
from permforce.exceptional import (
    TARGET,
    build_case,
    check_displayed_polynomials,
    emit_witness,
    solve_case,
    verify_lemma_facts,
)
from permforce.linalg import RatMatrix, inertia, kernel_basis, restricted_inertia
from permforce.permuton import density_in_step_permuton, mixture_of_permutation_matrices, pattern_frequencies
from permforce.perms import enumerate_Sk
from permforce.perturbation import (
    PerturbationPoint,
    h_gradient_at_zero,
    h_value,
    hessian_combination,
    perturbed_permuton,
)

from conftest import fd_ratios

MC_TRIALS = 10_000_000


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def appendix():
    start = time.time()
    sec = cert.verify_appendix(tolerance=0.02)
    return sec, time.time() - start


def test_criterion_1_gradient_fidelity(capsys):
    blocks = cert.appendix_blocks()
    start = time.time()
    bad, total = [], 0
    for b in blocks:
        for g in b["gradients"]:
            total += 1
            if h_gradient_at_zero(g["sigma"], b["n"]) != [Fraction(x) for x in g["entries"]]:
                bad.append(f"{b['n']}/{g['sigma']}")
    wall = time.time() - start
    ok = not bad and wall < 30 and {b["n"] for b in blocks} == {4, 5, 7}
    report(capsys, 1, ok, f"{total} gradients in {len(blocks)} blocks exact, {wall:.1f} s; mismatches {bad}")


def test_criterion_2_hessian_fidelity(appendix, capsys):
    sec, wall = appendix
    rest = [i for i in sec.items if "/gradient/" not in i.id]
    bad = [i.id for i in rest if not i.passed]
    blocks = {tuple(b["quadruple"]): b for b in cert.appendix_blocks()}
    kernel = inertia(cert.certify_non_forcing(["1432", "2341", "3214", "4123"], 4).hessian_combo).as_tuple()
    zero36 = blocks[("2143", "3412", "2413", "3142")]
    z = inertia(RatMatrix(zero36["hessian_combination"])).as_tuple()
    ok = not bad and kernel == (8, 0, 1) and z == (28, 0, 8) and wall < 300
    report(capsys, 2, ok, f"{len(rest)} matrix/spectrum/inertia items, failures {bad}; "
                          f"9x9 {kernel}, 36x36 {z}; {wall:.1f} s with gradients")


def test_criterion_3_certificates(capsys):
    data = cert.load_data("classes.json")
    targets = []
    for group, signs in (("all_one", "++++"), ("zero_combination", "++--")):
        for q, n in zip(data[group], data["grid_size"][group]):
            if n and n >= 5:
                targets.append((q, n, signs))
    bad = []
    for q, n, signs in targets:
        ev = cert.certify_non_forcing(q, n, signs)
        fi = ev.full_inertia
        if not (ev.verdict == cert.COROLLARY and fi.n_pos >= 4 and fi.n_neg >= 4):
            bad.append(",".join(q))
    special = ["1432", "2341", "3214", "4123"]
    ev = cert.certify_non_forcing(special, 4)
    value, orth = cert.check_witness_vector(special, 4, [1, 1, 1, 1], [-23, 42, -23, 128, 112, 128, 0, 8, 0])
    ok = not bad and ev.verdict == cert.KERNEL_RESTRICTED and value == -115456 and orth
    report(capsys, 3, ok, f"{len(targets) - len(bad)}/{len(targets)} CorollaryApplies "
                          f"(the listed classes give {len(targets)}, not 14); 1432 class {ev.verdict}, "
                          f"w-^T Q w- = {value}, orthogonal {orth}")


def test_criterion_4_negative_controls(capsys):
    first = ["1234", "2143", "3412", "4321"]
    second = ["1324", "2413", "3142", "4231"]
    details, ok = [], True
    for n in range(3, 8):
        got = inertia(hessian_combination(first, [1] * 4, n)).as_tuple()
        ok &= got == ((n - 1) ** 2, 0, 0)
        details.append(f"n={n} {got}")
    for n in (5, 6, 7):
        H = hessian_combination(second, [1] * 4, n)
        full = inertia(H)
        V = kernel_basis(RatMatrix([h_gradient_at_zero(p, n) for p in second]))
        res = restricted_inertia(H, V)
        ok &= full.n_pos == 1 and res.n_pos == 0 and res.n_zero == 0
        details.append(f"n={n} full {full.as_tuple()} restricted {res.as_tuple()}")
    report(capsys, 4, ok, "; ".join(details))


def test_criterion_5_enumeration(capsys):
    start = time.time()
    e = cert.enumerate_allone_quadruples()
    z = cert.enumerate_zerocombo_quadruples()
    wall = time.time() - start
    ok = (e.latin_squares == 576 and list(e.classes) == cert.listed_allone_quadruples()
          and list(z) == cert.listed_zerocombo_quadruples() and len(e.classes) == 12 and len(z) == 7
          and wall < 10)
    report(capsys, 5, ok, f"{e.latin_squares} Latin squares, {len(e.classes)} all-one and {len(z)} "
                          f"zero-combination classes, lists verbatim; {wall:.1f} s")


def test_criterion_6_exceptional_polynomials(capsys):
    secs = [check_displayed_polynomials(c) for c in (1, 2)]
    bad = [i.id for s in secs for i in s.failures()]
    n = sum(len(s.items) for s in secs)
    report(capsys, 6, not bad and n == 8, f"{n - len(bad)}/{n} displayed polynomials coefficient-exact")


def test_criterion_7_lemma_facts(capsys):
    c1, c2 = build_case(1), build_case(2)
    named = [
        ("g1+g2(7/10,0)", c1.g1(Fraction(7, 10), 0) + c1.g2(Fraction(7, 10), 0), Fraction(1954003, 19660800)),
        ("g1+g2(1/10,1)", c1.g1(Fraction(1, 10), 1) + c1.g2(Fraction(1, 10), 1), Fraction(8161877, 98304000)),
        ("g1(1/10,1)", c1.g1(Fraction(1, 10), 1), Fraction(1439731, 32768000)),
        ("case2 g1+g2(7/10,3/20)", c2.g1(Fraction(7, 10), Fraction(3, 20)) + c2.g2(Fraction(7, 10), Fraction(3, 20)),
         Fraction(209573047187, 2400000000000)),
    ]
    bad = [name for name, got, want in named if got != want]
    reps = [verify_lemma_facts(c) for c in (1, 2)]
    for r in reps:
        bad += [f"{i.id} (exact {i.value}, printed {i.expected})" for i in r.section.failures()]
    total = len(named) + sum(len(r.section.items) for r in reps)
    report(capsys, 7, not bad, f"{total - len(bad)}/{total} evaluations and sign claims exact; not exact: {bad}")


@pytest.fixture(scope="module")
def witnesses():
    out = {}
    for c in (1, 2):
        build_case(c)
        start = time.time()
        w = solve_case(c)
        out[c] = (w, time.time() - start)
    return out


def test_criterion_8_witnesses(witnesses, capsys):
    lines, ok = [], True
    for c, (w, wall) in witnesses.items():
        b = emit_witness(c, w)
        widths = (w.s_enclosure[1] - w.s_enclosure[0], w.t_enclosure[1] - w.t_enclosure[0])
        good = (max(widths) <= Fraction(1, 2**40) and w.max_residual <= Fraction(1, 10**12)
                and not b.permuton.is_uniform() and wall < 10)
        start = time.time()
        freq = pattern_frequencies(b.permuton, 4, MC_TRIALS, seed=1000 + c)
        se = np.sqrt(float(TARGET) * (1 - float(TARGET)) / MC_TRIALS)
        zs = {str(p): (freq.get(p, 0) / MC_TRIALS - float(TARGET)) / se for p in build_case(c).quadruple}
        mc_ok = all(abs(z) <= 5 for z in zs.values()) and time.time() - start < 300
        ok &= good and mc_ok
        zs_txt = ", ".join(f"{p} {z:+.1f}" for p, z in zs.items())
        lines.append(f"case {c}: width<=2^-40 {max(widths) <= Fraction(1, 2**40)}, residual "
                     f"{float(w.max_residual):.1e}, bisection {wall:.2f} s, MC z [{zs_txt}]")
    report(capsys, 8, ok, "; ".join(lines))


def test_criterion_9_property_suites(capsys):
    r = random.Random(909)
    S4 = enumerate_Sk(4)
    norm_ok = True
    for _ in range(50):
        k = r.randint(2, 5)
        perms = ["".join(map(str, r.sample(range(1, k + 1), k))) for _ in range(3)]
        raw = [r.randint(1, 20) for _ in range(3)]
        P = mixture_of_permutation_matrices(perms, [Fraction(x, sum(raw)) for x in raw])
        norm_ok &= sum(density_in_step_permuton(s, P) for s in S4) == 1
    ident_ok = True
    pool = enumerate_Sk(2) + enumerate_Sk(3) + S4
    for _ in range(100):
        sigma, k = r.choice(pool), r.randint(2, 4)
        p = PerturbationPoint(k, [Fraction(r.randint(-12, 12), 48) for _ in range((k - 1) ** 2)])
        d = density_in_step_permuton(sigma, perturbed_permuton(p))
        ident_ok &= h_value(sigma, p) == k ** (2 * sigma.size) * (d - Fraction(1, len(enumerate_Sk(sigma.size))))
    ratios = []
    for k in (2, 3, 4):
        for sigma in r.sample(S4, 4):
            v = [Fraction(r.randint(-5, 5), 5) for _ in range((k - 1) ** 2)]
            for rs in fd_ratios(sigma, k, v):
                ratios += [float(q) for q in rs if q is not None]
    fd_ok = len(ratios) >= 10 and all(3.5 <= q <= 4.5 for q in ratios)
    report(capsys, 9, norm_ok and ident_ok and fd_ok,
           f"normalization {norm_ok}, h-vs-density identity {ident_ok}, "
           f"{len(ratios)} halving ratios in [{min(ratios):.3f}, {max(ratios):.3f}]")
