import math

import numpy as np
import pytest

from zfepr.constants import J_DD_MHZ_NM3
from zfepr.dipolar import (
    SurfaceFrame,
    TargetGeometry,
    dipolar_tensor,
    effective_coupling,
    orientation_rotation,
    reduction_matrix,
    surface_rotation,
)


def test_tensor_symmetric_traceless():
    d = dipolar_tensor((3.0, -2.0, 5.0))
    np.testing.assert_allclose(d, d.T, atol=1e-12)
    assert np.trace(d) == pytest.approx(0.0, abs=1e-12)


def test_tensor_on_axis_value():
    # target on the z axis at r: D = (J/r^3) diag(1, 1, -2)
    r = 4.0
    d = dipolar_tensor((0.0, 0.0, r))
    np.testing.assert_allclose(
        d, (J_DD_MHZ_NM3 / r**3) * np.diag([1.0, 1.0, -2.0]), rtol=1e-12)


def test_tensor_scaling():
    d1 = dipolar_tensor((1.0, 2.0, 2.0))
    d2 = dipolar_tensor((2.0, 4.0, 4.0))
    np.testing.assert_allclose(d2, d1 / 8.0, rtol=1e-12)


def test_radius_floor():
    with pytest.raises(ValueError):
        dipolar_tensor((0.0, 0.0, 0.05))


def test_rotations_orthogonal():
    for mat in (orientation_rotation(0.7, 2.1), surface_rotation(0.5)):
        np.testing.assert_allclose(mat @ mat.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(mat) == pytest.approx(1.0, rel=1e-12)


def test_orientation_rotation_maps_z():
    theta, phi = 1.1, -0.4
    r = orientation_rotation(theta, phi)
    target = np.array([math.sin(theta) * math.cos(phi),
                       math.sin(theta) * math.sin(phi), math.cos(theta)])
    np.testing.assert_allclose(r @ np.array([0.0, 0.0, 1.0]), target,
                               atol=1e-12)


def test_reduction_matrix_channels():
    m0 = reduction_matrix(0, 0.3, 0.8)
    assert m0[2, 0] == pytest.approx(math.cos((0.3 + 0.8) / 2.0))
    assert np.count_nonzero(m0) == 1
    mp = reduction_matrix(1, 0.3, 0.8)
    mm = reduction_matrix(-1, 0.3, 0.8)
    # transverse channels only; no z column
    assert np.all(mp[:, 2] == 0) and np.all(mm[:, 2] == 0)
    with pytest.raises(ValueError):
        reduction_matrix(2, 0.0, 0.0)


def test_effective_coupling_positive_and_scales():
    geom = TargetGeometry((2.0, 1.0, 6.0), 0.9, 1.7)
    far = TargetGeometry((4.0, 2.0, 12.0), 0.9, 1.7)
    frame = SurfaceFrame(0.3)
    c_near = effective_coupling(geom, frame, 1, 0.4, 1.0)
    c_far = effective_coupling(far, frame, 1, 0.4, 1.0)
    assert c_near > 0
    # D ~ r^-3, coupling ~ r^-6
    assert c_far == pytest.approx(c_near / 64.0, rel=1e-12)


def test_geometry_validation():
    with pytest.raises(ValueError):
        TargetGeometry((0.0, 0.0, 0.0), 0.0, 0.0)
    with pytest.raises(ValueError):
        TargetGeometry((1.0, 0.0, 0.0), 4.0, 0.0)
    with pytest.raises(ValueError):
        SurfaceFrame(2.0)
