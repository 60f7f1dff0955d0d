import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fermidistill.linalg import random_orthogonal
from fermidistill.states import (
    BipartiteSplit,
    CovarianceMatrix,
    RealProjectionPair,
    ValidationError,
    assemble_covariance,
    blocks,
    fock_fidelity,
    load_covariance,
    maximally_entangled_projection,
    output_fidelity,
    parity_expectation,
    parity_probability,
    partner_projection,
    protocol_quantities,
    random_basis_projection,
    random_covariance,
    restrict,
    save_covariance,
    target_orientation,
    twirl_coefficients,
    validate,
)


def mixed(n):
    return CovarianceMatrix(0.5 * np.eye(2 * n))


class TestValidate:
    def test_maximally_mixed_valid(self):
        assert validate(mixed(3)).passed

    def test_basis_projection_valid(self, rng):
        assert validate(random_basis_projection(3, rng)).passed

    def test_identity_invalid_reality(self):
        report = validate(CovarianceMatrix(np.eye(4)))
        assert not report.passed
        assert any("reality" in name for name, _, _ in report.violations)

    def test_random_covariance_valid(self, rng):
        for _ in range(10):
            assert validate(random_covariance(4, rng)).passed

    def test_spectrum_violation_detected(self):
        g = np.zeros((4, 4))
        g[0, 1], g[1, 0] = 0.9, -0.9  # eigenvalues of iG reach 0.9 > 1/2
        report = validate(CovarianceMatrix(0.5 * np.eye(4) + 1j * g))
        assert not report.passed
        assert any("spectrum" in name for name, _, _ in report.violations)

    def test_reports_do_not_raise(self):
        # even garbage input produces a report rather than an exception
        report = validate(np.ones((4, 4)))
        assert not report.passed


class TestBlocks:
    def test_maximally_mixed_blocks_vanish(self):
        blk = blocks(mixed(2), BipartiteSplit.halves(4))
        assert np.abs(blk.x).max() == 0
        assert np.abs(blk.y).max() == 0
        assert np.abs(blk.z).max() == 0

    def test_maximally_entangled_blocks(self, rng):
        v = random_orthogonal(4, rng)
        split = BipartiteSplit.halves(8)
        e = maximally_entangled_projection(v, split)
        blk = blocks(e, split)
        assert np.abs(blk.x).max() < 1e-12
        assert np.abs(blk.z).max() < 1e-12
        np.testing.assert_allclose(blk.y.T @ blk.y, np.eye(4), atol=1e-12)

    def test_antisymmetry_of_diagonal_blocks(self, rng):
        s = random_covariance(4, rng)
        blk = blocks(s, BipartiteSplit.halves(8))
        np.testing.assert_allclose(blk.x, -blk.x.T, atol=1e-12)
        np.testing.assert_allclose(blk.z, -blk.z.T, atol=1e-12)

    def test_roundtrip_through_assemble(self, rng):
        s = random_covariance(3, rng)
        split = BipartiteSplit((0, 1, 2), (3, 4, 5))
        blk = blocks(s, split)
        s2, split2 = assemble_covariance(blk)
        blk2 = blocks(s2, split2)
        np.testing.assert_allclose(blk.x, blk2.x, atol=1e-12)
        np.testing.assert_allclose(blk.y, blk2.y, atol=1e-12)
        np.testing.assert_allclose(blk.z, blk2.z, atol=1e-12)

    def test_wrong_basis_rejected(self):
        s = np.full((4, 4), 0.25) + 0.5 * np.eye(4)  # real symmetric, not 1/2 + i*antisym
        with pytest.raises(ValidationError, match="imaginary residue|basis"):
            blocks(s, BipartiteSplit.halves(4))


class TestParity:
    def test_maximally_mixed_expectation_zero(self):
        assert parity_expectation(mixed(3)) == 0.0

    def test_pure_state_expectation_unimodular(self, rng):
        for _ in range(5):
            e = random_basis_projection(3, rng)
            assert abs(parity_expectation(e)) == pytest.approx(1.0, abs=1e-10)

    def test_adapted_basis_parity_value(self):
        # target state in its adapted basis: expectation (-1)^m before the fix
        for m in (1, 2, 3):
            e = maximally_entangled_projection(np.eye(2 * m), BipartiteSplit.halves(4 * m))
            assert parity_expectation(e) == pytest.approx((-1.0) ** m, abs=1e-12)

    def test_probability_maximally_mixed(self):
        for m in (1, 2, 3):
            assert parity_probability(mixed(2 * m)) == pytest.approx(0.5)

    def test_probability_on_target_is_one(self, rng):
        for m in (1, 2):
            v = random_orthogonal(2 * m, rng)
            e = maximally_entangled_projection(v, BipartiteSplit.halves(4 * m))
            orient = target_orientation(e)
            assert parity_probability(e, orientation=orient) == pytest.approx(1.0, abs=1e-10)

    def test_probability_equals_expectation_relation(self, rng):
        # p = (1 + (-1)^m <parity>)/2, both through the same Pfaffian
        s = random_covariance(2, rng)
        m = 1
        expect = parity_expectation(s)
        assert parity_probability(s) == pytest.approx((1 + (-1) ** m * expect) / 2, abs=1e-12)

    def test_orientation_flip(self, rng):
        s = random_covariance(2, rng)
        p_plus = parity_probability(s, orientation=1)
        p_minus = parity_probability(s, orientation=-1)
        assert p_plus + p_minus == pytest.approx(1.0, abs=1e-12)


class TestFidelity:
    def test_self_fidelity_one(self, rng):
        e = random_basis_projection(3, rng)
        assert fock_fidelity(e, e) == pytest.approx(1.0, abs=1e-10)

    def test_maximally_mixed_fidelity(self, rng):
        for n in (1, 2, 3, 4):
            e = random_basis_projection(n, rng)
            assert fock_fidelity(mixed(n), e) == pytest.approx(2.0 ** -n, abs=1e-10)

    def test_fidelity_in_unit_interval(self, rng):
        for _ in range(20):
            s = random_covariance(3, rng)
            e = random_basis_projection(3, rng)
            assert 0.0 <= fock_fidelity(s, e) <= 1.0

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValidationError):
            fock_fidelity(mixed(2), random_basis_projection(3, rng))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**31))
    def test_fidelity_sum_bounded_by_parity_probability(self, seed):
        # fid(S, E) + fid(S, partner) = p * f <= p
        rng = np.random.default_rng(seed)
        n = rng.choice([2, 4])
        split = BipartiteSplit.halves(2 * n)
        s = random_covariance(n, rng)
        v = random_orthogonal(n, rng)
        e = maximally_entangled_projection(v, split)
        both = fock_fidelity(s, e) + fock_fidelity(s, partner_projection(e, split))
        p = parity_probability(s, orientation=target_orientation(e))
        assert both <= p + 1e-9


class TestPartnerProjection:
    def test_sign_flip(self, rng):
        split = BipartiteSplit.halves(8)
        e = maximally_entangled_projection(np.eye(4), split)
        partner = partner_projection(e, split)
        blk = blocks(partner, split)
        np.testing.assert_allclose(blk.y, -np.eye(4), atol=1e-12)

    def test_involution(self, rng):
        split = BipartiteSplit.halves(8)
        e = maximally_entangled_projection(random_orthogonal(4, rng), split)
        back = partner_projection(partner_projection(e, split), split)
        np.testing.assert_allclose(back.matrix, e.matrix, atol=1e-12)

    def test_same_orientation(self, rng):
        split = BipartiteSplit.halves(8)
        e = maximally_entangled_projection(random_orthogonal(4, rng), split)
        partner = partner_projection(e, split)
        assert parity_expectation(partner) == pytest.approx(parity_expectation(e), abs=1e-10)
        assert target_orientation(partner) == target_orientation(e)


class TestProtocolQuantities:
    def test_perfect_state(self, rng):
        split = BipartiteSplit.halves(8)
        v = random_orthogonal(4, rng)
        e = maximally_entangled_projection(v, split)
        q = protocol_quantities(e, split, RealProjectionPair.identity(4, 4), v)
        assert q.p == pytest.approx(1.0, abs=1e-10)
        assert q.f == pytest.approx(1.0, abs=1e-10)

    def test_maximally_mixed(self, rng):
        split = BipartiteSplit.halves(8)
        v = random_orthogonal(4, rng)
        q = protocol_quantities(mixed(4), split, RealProjectionPair.identity(4, 4), v)
        assert q.p == pytest.approx(0.5, abs=1e-12)
        assert q.f == pytest.approx(0.25, abs=1e-12)

    def test_pf_consistency(self, rng):
        split = BipartiteSplit.halves(8)
        s = random_covariance(4, rng)
        v = random_orthogonal(4, rng)
        q = protocol_quantities(s, split, RealProjectionPair.identity(4, 4), v)
        assert q.pf == pytest.approx(q.p * q.f, abs=1e-12)

    def test_non_isometry_rejected(self, rng):
        split = BipartiteSplit.halves(8)
        s = random_covariance(4, rng)
        with pytest.raises(ValidationError, match="isometry"):
            protocol_quantities(
                s, split, RealProjectionPair.identity(4, 4), np.ones((4, 4))
            )


class TestTwirl:
    def test_pure_target(self):
        lam_p, lam_m, mu_p, mu_m = twirl_coefficients(1.0, 1.0, 0.0, 2)
        assert (lam_p, lam_m, mu_p, mu_m) == pytest.approx((1.0, 0.0, 0.0, 0.0), abs=1e-12)

    def test_maximally_mixed_uniform(self):
        # n = 2m modes maximally mixed: fidelities 4^-m, weights 1/(4 d^2)
        for m in (2, 3):
            fid = 4.0 ** -m
            lam_p, lam_m, mu_p, mu_m = twirl_coefficients(0.5, fid, fid, m)
            d2 = 4.0 ** (m - 1)
            assert lam_p == pytest.approx(0.0, abs=1e-12)
            assert lam_m == pytest.approx(0.0, abs=1e-12)
            assert mu_p == pytest.approx(1.0 / (4 * d2), abs=1e-12)
            assert mu_m == pytest.approx(1.0 / (4 * d2), abs=1e-12)

    def test_roundtrip_residual(self, rng):
        for _ in range(10):
            m = int(rng.integers(2, 5))
            d2 = 4.0 ** (m - 1)
            # sample a consistent coefficient set, derive the observables
            lam_p, lam_m = rng.uniform(0, 0.3, 2)
            mu_p = rng.uniform(0, 0.2 / (2 * d2))
            mu_m = (1 - (lam_p + lam_m + 2 * mu_p * d2)) / (2 * d2)
            p = lam_p + lam_m + 2 * mu_p * d2
            got = twirl_coefficients(p, lam_p + mu_p, lam_m + mu_p, m)
            assert got == pytest.approx((lam_p, lam_m, mu_p, mu_m), abs=1e-12)

    def test_inconsistent_inputs_rejected(self):
        # fid_e + fid_partner > p would give the twirled state a negative
        # eigenvalue; no state produces such inputs
        with pytest.raises(ValidationError, match="negative"):
            twirl_coefficients(0.1, 0.9, 0.9, 2)

    def test_negative_lambda_is_legitimate(self):
        # a pure product state has p = 1 with vanishing overlap on both
        # targets: lambda+- = -1/6 while every eigenvalue stays >= 0
        lam_p, lam_m, mu_p, mu_m = twirl_coefficients(1.0, 0.0, 0.0, 2)
        assert lam_p == pytest.approx(-1 / 6)
        assert lam_m == pytest.approx(-1 / 6)
        assert mu_p == pytest.approx(1 / 6)
        assert mu_m == pytest.approx(0.0)
        # the four defining equations hold
        d2 = 4.0
        assert (lam_p + lam_m) / 2 + mu_p * d2 == pytest.approx(0.5)
        assert mu_m * d2 == pytest.approx(0.0)

    def test_coefficients_from_random_quasifree_states(self, rng):
        # inputs generated by actual states never trip the consistency check
        split = BipartiteSplit.halves(8)
        for _ in range(25):
            s = random_covariance(4, rng)
            v = random_orthogonal(4, rng)
            e = maximally_entangled_projection(v, split)
            fid_e = fock_fidelity(s, e)
            fid_t = fock_fidelity(s, partner_projection(e, split))
            p = parity_probability(s, orientation=target_orientation(e))
            lam_p, lam_m, mu_p, mu_m = twirl_coefficients(p, fid_e, fid_t, 2)
            assert lam_p + mu_p == pytest.approx(fid_e, abs=1e-12)
            assert lam_m + mu_p == pytest.approx(fid_t, abs=1e-12)
            assert mu_p >= -1e-12 and mu_m >= -1e-12


class TestOutputFidelity:
    def test_perfect(self):
        f, flag = output_fidelity(1.0, 0.0, 1.0, 2)
        assert f == 1.0 and flag

    def test_boundary_not_distillable(self):
        f, flag = output_fidelity(1 / 16, 1 / 16, 0.5, 2)
        assert f == pytest.approx(0.25)
        assert not flag  # 1/4 <= 1/2 = 1/d

    def test_zero_probability_rejected(self):
        with pytest.raises(ValidationError):
            output_fidelity(0.1, 0.1, 0.0, 2)


class TestRestrict:
    def test_identity_projection(self, rng):
        s = random_covariance(4, rng)
        split = BipartiteSplit.halves(8)
        out, _ = restrict(s, split, RealProjectionPair.identity(4, 4))
        # same state up to the orthonormal frame choice: compare spectra
        np.testing.assert_allclose(
            np.linalg.eigvalsh(out.matrix), np.linalg.eigvalsh(s.matrix), atol=1e-10
        )

    def test_maximally_mixed_stays_mixed(self, rng):
        split = BipartiteSplit.halves(8)
        u = random_orthogonal(4, rng)[:, :2]
        pair = RealProjectionPair(u @ u.T, u @ u.T)
        out, _ = restrict(mixed(4), split, pair)
        np.testing.assert_allclose(out.matrix, 0.5 * np.eye(4), atol=1e-12)

    def test_output_valid(self, rng):
        split = BipartiteSplit.halves(12)
        s = random_covariance(6, rng)
        ua = random_orthogonal(6, rng)[:, :4]
        ub = random_orthogonal(6, rng)[:, :4]
        out, new_split = restrict(s, split, RealProjectionPair(ua @ ua.T, ub @ ub.T))
        assert validate(out).passed
        assert out.n_modes == 4
        assert len(new_split.a) == len(new_split.b) == 4


class TestFileFormat:
    def test_roundtrip(self, tmp_path, rng):
        s = random_covariance(3, rng)
        split = BipartiteSplit((0, 2, 4), (1, 3, 5))
        path = tmp_path / "state.json"
        save_covariance(path, s, split)
        s2, split2 = load_covariance(path)
        np.testing.assert_allclose(s.matrix, s2.matrix, atol=0)
        assert split2.a == split.a

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"modes": 2, "split_a": [0, 1]}')
        with pytest.raises(ValidationError, match="entries"):
            load_covariance(path)

    def test_wrong_entry_count(self, tmp_path):
        path = tmp_path / "short.json"
        path.write_text('{"modes": 2, "split_a": [0, 1], "entries": [[0.5, 0.0]]}')
        with pytest.raises(ValidationError, match="expected 16 entries"):
            load_covariance(path)


class TestPipelineComposition:
    def test_twirl_route_equals_protocol_route(self, rng):
        # p, fidelities -> twirl -> output fidelity reproduces the direct
        # two-Pfaffian evaluation on random states and random targets
        split = BipartiteSplit.halves(8)
        for _ in range(10):
            s = random_covariance(4, rng)
            v = random_orthogonal(4, rng)
            e = maximally_entangled_projection(v, split)
            fid_e = fock_fidelity(s, e)
            fid_t = fock_fidelity(s, partner_projection(e, split))
            p = parity_probability(s, orientation=target_orientation(e))
            assert p > 1e-6
            f_twirl, distillable = output_fidelity(fid_e, fid_t, p, 2)
            q = protocol_quantities(s, split, RealProjectionPair.identity(4, 4), v)
            assert q.p == pytest.approx(p, abs=1e-12)
            assert q.f == pytest.approx(f_twirl, abs=1e-10)
            assert distillable == (q.f > 0.5)
            # the twirled-state coefficients reproduce the same observables
            lam_p, lam_m, mu_p, mu_m = twirl_coefficients(p, fid_e, fid_t, 2)
            assert lam_p + mu_p == pytest.approx(fid_e, abs=1e-12)
            assert (lam_p + lam_m) / 2 + 4 * mu_p == pytest.approx(p / 2, abs=1e-12)


class TestBasisCovariance:
    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**31))
    def test_protocol_quantities_invariant_under_local_rotations(self, seed):
        # independent real orthogonal rotations of each party's reference
        # space (determinants +-1 at random) must leave p and f unchanged;
        # this exercises the orientation normalization directly
        rng = np.random.default_rng(seed)
        split = BipartiteSplit.halves(8)
        s = random_covariance(4, rng)
        v = random_orthogonal(4, rng)
        q = protocol_quantities(s, split, RealProjectionPair.identity(4, 4), v)

        ra = random_orthogonal(4, rng)
        rb = random_orthogonal(4, rng)
        r = np.zeros((8, 8))
        r[:4, :4] = ra
        r[4:, 4:] = rb
        s_rot = CovarianceMatrix(r.T @ s.matrix @ r)
        v_rot = ra.T @ v @ rb
        q_rot = protocol_quantities(s_rot, split, RealProjectionPair.identity(4, 4), v_rot)
        assert q_rot.p == pytest.approx(q.p, abs=1e-11)
        assert q_rot.pf == pytest.approx(q.pf, abs=1e-11)

    def test_parity_probability_covariant_with_target(self, rng):
        # rotating the basis flips the raw Pfaffian sign with det(R), and
        # the target-derived orientation flips with it
        split = BipartiteSplit.halves(8)
        s = random_covariance(4, rng)
        v = random_orthogonal(4, rng)
        e = maximally_entangled_projection(v, split)
        p = parity_probability(s, orientation=target_orientation(e))

        ra = random_orthogonal(4, rng)
        rb = random_orthogonal(4, rng)
        r = np.zeros((8, 8))
        r[:4, :4] = ra
        r[4:, 4:] = rb
        s_rot = CovarianceMatrix(r.T @ s.matrix @ r)
        e_rot = CovarianceMatrix(r.T @ e.matrix @ r)
        p_rot = parity_probability(s_rot, orientation=target_orientation(e_rot))
        assert p_rot == pytest.approx(p, abs=1e-11)
