""" Unit tests for elasticitymodel. """

###########
# Imports #
###########
# Standard library
import math

# Testing
import pytest
import unittest

# Data Science
import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

# Custom Modules
from exceptions.solver_exceptions import AssemblyError
from exceptions.solver_exceptions import BlochError
from exceptions.solver_exceptions import ConvergenceError
from exceptions.solver_exceptions import SingularMaterial
from exceptions.solver_exceptions import TooManyModes
from models import elasticitymodel as em
from models import geometrymodel as gm
from models import meshmodel


#########
# Setup #
#########
DIAMOND = gm.Material.from_config(1050, 0.2, 3539, 0.3)


def _plate(nx=4, ny=2, width=10e-6, height=5e-6):
    return meshmodel.rectangle_mesh(width, height, nx, ny)


@pytest.fixture(scope='module')
def plate_ops():
    return em.assemble(_plate(), DIAMOND)


@pytest.fixture(scope='module')
def plate_modes(plate_ops):
    return em.eigs(plate_ops, 0.0, 8)


##############
# Unit Tests #
##############
def test_lame_constants_diamond():
    lame = em.lame_constants(DIAMOND)
    assert np.isclose(lame.lam, 291.6666666e9, rtol=1e-9)
    assert np.isclose(lame.mu, 437.5e9, rtol=1e-12)


def test_lame_constants_zero_poisson():
    lame = em.lame_constants(gm.Material(1e9, 0.0, 1000.0, 1e-6))
    assert lame.lam == 0.0
    assert np.isclose(lame.mu, 0.5e9)


def test_lame_constants_incompressible():
    with pytest.raises(SingularMaterial):
        em.lame_constants(gm.Material(1e9, 0.5, 1000.0, 1e-6))


def test_plane_stress_lambda():
    lame = em.lame_constants(DIAMOND)
    E, nu = 1.05e12, 0.2
    # Plane-stress constitutive entry C11 = E / (1 - nu^2)
    D = lame.plane_stress_matrix()
    assert np.isclose(D[0, 0], E / (1 - nu ** 2), rtol=1e-12)
    assert np.isclose(D[0, 1], nu * E / (1 - nu ** 2), rtol=1e-12)


def test_patch_test_linear_field():
    region = gm.PolyRegion([(0, 0), (10e-6, 0), (10e-6, 10e-6),
                            (0, 10e-6)])
    mesh = meshmodel.triangulate(region, 2.5e-6)
    ops = em.assemble(mesh, DIAMOND)
    alpha, beta, gamma, delta = 1e-3, -2e-4, 5e-4, 3e-4
    x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
    exact = np.column_stack([alpha * x + beta * y,
                             gamma * x + delta * y]).ravel()

    bdofs = np.concatenate([2 * mesh.tag('boundary'),
                            2 * mesh.tag('boundary') + 1])
    free = np.setdiff1d(np.arange(mesh.n_dof), bdofs)
    K = ops.K.tocsr()
    rhs = -K[free][:, bdofs] @ exact[bdofs]
    u_free = spsolve(K[free][:, free].tocsc(), rhs)
    err = np.abs(u_free - exact[free]).max()
    assert err <= 1e-10 * np.abs(exact).max()


def test_stiffness_is_positive_semidefinite(plate_ops):
    rng = np.random.default_rng(11)
    K = plate_ops.K
    normK = abs(K).sum(axis=0).max()
    for _ in range(20):
        x = rng.standard_normal(K.shape[0])
        assert x @ (K @ x) >= -1e-12 * normK * (x @ x)


def test_operators_symmetric(plate_ops):
    for A in (plate_ops.K, plate_ops.M):
        assert abs(A - A.T).max() == 0.0


def test_free_plate_rigid_modes(plate_modes):
    lam = np.array([m.eigenvalue for m in plate_modes])
    assert np.all(np.abs(lam[:3]) <= 1e-6 * lam[3])
    assert lam[3] > 0
    assert all(m.frequency <= n.frequency
               for m, n in zip(plate_modes, plate_modes[1:]))


def test_mass_normalized(plate_ops, plate_modes):
    for m in plate_modes:
        v = m.vector
        assert abs(np.real(v.conj() @ (plate_ops.M @ v)) - 1.0) <= 1e-10
        assert m.residual <= 1e-9
        assert m.backward_error <= 1e-9


def test_residual_is_relative_to_stiffness_action(plate_ops, plate_modes):
    K, M = plate_ops.K, plate_ops.M
    rng = np.random.default_rng(3)
    m = plate_modes[4]
    v = m.vector + 1e-3 * rng.standard_normal(len(m.vector))
    lam = np.array([m.eigenvalue])
    residual, backward = em._residuals(K, M, lam, v[:, None])
    expected = (np.linalg.norm(K @ v - m.eigenvalue * (M @ v))
                / np.linalg.norm(K @ v))
    assert residual[0] == pytest.approx(expected, rel=1e-10)
    assert backward[0] < residual[0]


def test_sparse_matches_dense_oracle():
    ops = em.assemble(_plate(8, 4), DIAMOND)
    sparse = em.eigs(ops, 0.0, 8, method='sparse')
    lam, _ = sla.eigh(ops.K.toarray(), ops.M.toarray())
    expected = np.sort(lam)[3:8]
    got = np.array([m.eigenvalue for m in sparse])[3:8]
    assert np.allclose(got, expected, rtol=1e-8, atol=0)


def test_interior_shift_selects_nearest():
    ops = em.assemble(_plate(8, 4), DIAMOND)
    lam = np.sort(sla.eigh(ops.K.toarray(), ops.M.toarray(),
                           eigvals_only=True))
    f_all = np.sqrt(np.clip(lam, 0, None)) / (2 * math.pi)
    shift = 1.003 * f_all[20]
    modes = em.eigs(ops, shift, 5, method='sparse')
    nearest = np.sort(lam[np.argsort(np.abs(lam - (2 * math.pi * shift) ** 2))
                          [:5]])
    got = np.array([m.eigenvalue for m in modes])
    assert np.allclose(got, nearest, rtol=1e-8)


def test_eigs_window(plate_ops, plate_modes):
    f = [m.frequency for m in plate_modes]
    window = em.eigs_window(plate_ops, 0.999 * f[3], 1.001 * f[5])
    assert np.allclose([m.frequency for m in window], f[3:6], rtol=1e-9)


@pytest.mark.parametrize("count, tol, error", [
    (0, 1e-9, TooManyModes),
    (10_000, 1e-9, TooManyModes),
    (3, 1e-13, ConvergenceError),
])
def test_eigs_errors(plate_ops, count, tol, error):
    with pytest.raises(error):
        em.eigs(plate_ops, 0.0, count, tol)


def test_non_positive_jacobian():
    mesh = _plate()
    elements = mesh.elements.copy()
    elements[0] = elements[0][[0, 2, 1, 5, 4, 3]]
    flipped = meshmodel.Mesh(mesh.nodes, elements, mesh.boundary_tags,
                             mesh.target_h)
    with pytest.raises(AssemblyError):
        em.assemble(flipped, DIAMOND)


def test_energy_identity(plate_ops, plate_modes):
    for m in plate_modes[3:]:
        energy = em.strain_energy_field(plate_ops, m)
        kinetic = 0.5 * m.omega ** 2 * np.real(
            m.vector.conj() @ (plate_ops.M @ m.vector))
        assert np.isclose(energy.sum(), 0.5 * m.omega ** 2, rtol=1e-8)
        assert np.isclose(energy.sum(), kinetic, rtol=1e-8)


def test_rigid_mode_has_no_strain_energy(plate_ops, plate_modes):
    scale = plate_modes[3].omega ** 2
    for m in plate_modes[:3]:
        energy = em.strain_energy_field(plate_ops, m)
        assert abs(energy.sum()) <= 1e-10 * scale


def test_uniform_dilation_energy_density(plate_ops):
    mesh = plate_ops.mesh
    disp = 1e-3 * mesh.nodes.astype(complex)
    mode = em.ModeSolution(0.0, 0.0, 0.0, disp, disp.ravel(), 0.0, 0.0)
    density = em.strain_energy_field(plate_ops, mode) / mesh.element_areas()
    assert np.allclose(density, density[0], rtol=1e-10)


def test_scale_invariance():
    mesh = _plate()
    f1 = [m.frequency for m in em.eigs(em.assemble(mesh, DIAMOND), 0.0, 8)]
    f2 = [m.frequency for m in em.eigs(em.assemble(mesh.scaled(2.0),
                                                   DIAMOND), 0.0, 8)]
    assert np.allclose(np.array(f2[3:]) * 2, f1[3:], rtol=1e-6)


def test_material_scaling():
    mesh = _plate()
    stiff = gm.Material(4 * DIAMOND.youngs_modulus, DIAMOND.poisson_ratio,
                        DIAMOND.density, DIAMOND.thickness)
    f1 = [m.frequency for m in em.eigs(em.assemble(mesh, DIAMOND), 0.0, 8)]
    f2 = [m.frequency for m in em.eigs(em.assemble(mesh, stiff), 0.0, 8)]
    f3 = [m.frequency for m in em.eigs(em.assemble(
        mesh, DIAMOND.scaled(4.0)), 0.0, 8)]
    assert np.allclose(f2[3:], 2 * np.array(f1[3:]), rtol=1e-10)
    assert np.allclose(f3[3:], f1[3:], rtol=1e-10)


def test_mode_text_file(tmp_path, plate_modes):
    path = tmp_path / 'mode.txt'
    mode = plate_modes[4]
    em.write_mode(path, mode)
    loaded = em.read_mode(path)
    assert np.isclose(loaded.frequency, mode.frequency, rtol=1e-11)
    assert np.allclose(loaded.displacement, mode.displacement,
                       rtol=1e-10, atol=1e-12 * np.abs(mode.displacement).max())


class TestBloch(unittest.TestCase):
    """ Bloch reduction on a periodic strip cell. """

    def setUp(self):
        self.d = 6e-6
        self.mesh = meshmodel.rectangle_mesh(self.d, 3e-6, 6, 3)
        self.ops = em.assemble(self.mesh, DIAMOND)
        self.pmap = meshmodel.periodic_pair(self.mesh, 'left', 'right',
                                            (self.d, 0.0))


    def tearDown(self):
        del self.ops


    def test_zero_wavevector_is_real(self):
        red = em.apply_bloch(self.ops, self.pmap, 0.0)
        self.assertTrue(red.reduced)
        self.assertFalse(np.iscomplexobj(red.K.toarray()))
        self.assertEqual(red.n_unknowns,
                         self.mesh.n_dof - 2 * len(self.pmap))


    def test_zone_edge_is_hermitian(self):
        red = em.apply_bloch(self.ops, self.pmap, math.pi / self.d)
        K = red.K.toarray()
        self.assertLessEqual(np.abs(K - K.conj().T).max(),
                             1e-12 * np.abs(K).max())


    def test_time_reversal(self):
        k = 0.37 * math.pi / self.d
        plus = em.eigs(em.apply_bloch(self.ops, self.pmap, k), 0.0, 6)
        minus = em.eigs(em.apply_bloch(self.ops, self.pmap, -k), 0.0, 6)
        self.assertTrue(np.allclose([m.frequency for m in plus],
                                    [m.frequency for m in minus],
                                    rtol=1e-8))


    def test_bloch_phase_of_mode(self):
        k = 0.25 * math.pi / self.d
        mode = em.eigs(em.apply_bloch(self.ops, self.pmap, k), 0.0, 3)[1]
        u = mode.displacement
        minus, plus = self.pmap.pairs[:, 0], self.pmap.pairs[:, 1]
        self.assertTrue(np.allclose(u[plus], np.exp(1j * k * self.d) * u[minus]))


    def test_outside_zone(self):
        with self.assertRaises(BlochError):
            em.apply_bloch(self.ops, self.pmap, 1.1 * math.pi / self.d)


    def test_missing_axis(self):
        with self.assertRaises(BlochError):
            em.apply_bloch(self.ops, self.pmap, (0.0, 1e5))
        with self.assertRaises(BlochError):
            em.apply_bloch(self.ops, [], 0.0)


    def test_already_reduced(self):
        red = em.apply_bloch(self.ops, self.pmap, 0.0)
        with self.assertRaises(BlochError):
            em.apply_bloch(red, self.pmap, 0.0)


if __name__ == '__main__':
    unittest.main()
