"""Spatial norms and space-time accumulators."""
import numpy as np
import pytest

from hydrostat.errors import InsufficientData, InvalidParameter, OrderingError
from hydrostat.norms import (
    NormAccumulator,
    accumulate,
    finalize,
    norm_aniso,
    norm_sobolev,
)
from hydrostat.spectral import (
    EVEN,
    SpectralField,
    field_from_function,
    laplacian_delta,
    make_grid,
)

from conftest import random_band_field

PI = np.pi


class TestSpatialNorms:
    def test_constant(self, grid16):
        one = field_from_function(grid16, lambda x, y, z: np.ones_like(x))
        for s in (0.0, 1.0, 1.5):
            assert norm_sobolev(one, s) == pytest.approx(np.sqrt(8.0))

    def test_sine_values(self, grid16):
        f = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        assert norm_sobolev(f, 0.0) == pytest.approx(2.0)
        assert norm_sobolev(f, 1.0) == pytest.approx(2 * np.sqrt(1 + PI**2))

    def test_negative_s_rejected(self, grid16):
        f = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        with pytest.raises(InvalidParameter):
            norm_sobolev(f, -0.5)

    def test_aniso_values(self, grid16):
        cz = field_from_function(grid16, lambda x, y, z: np.cos(PI * z))
        sx = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        mixed = field_from_function(
            grid16, lambda x, y, z: np.cos(PI * z) * np.sin(PI * x)
        )
        assert norm_aniso(cz, 1, 0) == pytest.approx(2 * np.sqrt(1 + PI**2))
        assert norm_aniso(sx, 1, 0) == pytest.approx(2.0)
        assert norm_aniso(mixed, 1, 1) == pytest.approx(np.sqrt(2) * (1 + PI**2))

    @pytest.mark.parametrize("r,s", [(4, 0), (-1, 1), (1, 2)])
    def test_aniso_unsupported(self, grid16, r, s):
        f = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        with pytest.raises(InvalidParameter):
            norm_aniso(f, r, s)

    def test_homogeneity(self, grid16):
        f = random_band_field(grid16, 7)
        assert norm_sobolev(2.5 * f, 1.0) == pytest.approx(2.5 * norm_sobolev(f, 1.0))
        assert norm_aniso(2.5 * f, 1, 1) == pytest.approx(2.5 * norm_aniso(f, 1, 1))


def _march(acc, samples, dt, dsamples=None):
    for i, u in enumerate(samples):
        du = None if dsamples is None else dsamples[i]
        acc = accumulate(acc, u, du, None if i == 0 else dt)
    return acc


class TestAccumulators:
    def test_e0_constant_sample(self, grid16):
        g = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        acc = _march(NormAccumulator("E0"), [(g,), (g,)], 1.0)
        assert finalize(acc) == pytest.approx(norm_sobolev(g, 0.0))

    def test_e0_exponential_decay(self, grid16):
        g = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        dt = 1e-3
        ts = np.arange(0, 1 + dt / 2, dt)
        acc = NormAccumulator("E0")
        for i, t in enumerate(ts):
            acc = accumulate(acc, (g * float(np.exp(-t)),), None, None if i == 0 else dt)
        expected = norm_sobolev(g, 0.0) * np.sqrt((1 - np.exp(-2)) / 2)
        assert finalize(acc) == pytest.approx(expected, rel=1e-6)

    def test_ez_z_independent_collapses(self, grid16):
        g = field_from_function(grid16, lambda x, y, z: np.sin(PI * x), EVEN)
        acc = _march(NormAccumulator("Ez"), [(g,), (g,)], 2.0)
        # with no z-dependence H1_z factors reduce to L2_z
        expected = np.sqrt(2.0) * norm_aniso(g, 0, 1) + norm_sobolev(g, 0.0)
        assert finalize(acc) == pytest.approx(expected, rel=1e-12)

    def test_ehdelta_multiplier_reproduction(self, grid16):
        delta = 0.7
        g = field_from_function(
            grid16, lambda x, y, z: np.sin(PI * x) * np.cos(PI * z), EVEN
        )
        zero = 0.0 * g
        acc = _march(
            NormAccumulator("EHdelta", delta=delta),
            [(g,), (g,)], 1.0, dsamples=[(zero,), (zero,)],
        )
        mult = PI**2 + delta * PI**2  # single mode |k_H|^2 + delta kz^2
        expected = norm_sobolev(g, 0.0) * (1.0 + mult)
        assert finalize(acc) == pytest.approx(expected, rel=1e-12)
        # consistency with the laplacian operator itself
        assert norm_sobolev(laplacian_delta(g, delta), 0.0) == pytest.approx(
            mult * norm_sobolev(g, 0.0)
        )

    def test_l4h32_exponential(self, grid16):
        g = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        dt = 1e-3
        acc = NormAccumulator("L4H32")
        n = int(round(20.0 / dt))
        for i in range(n + 1):
            acc = accumulate(acc, (g * float(np.exp(-i * dt)),), None, None if i == 0 else dt)
        expected = norm_sobolev(g, 1.5) * 0.25**0.25
        assert finalize(acc) == pytest.approx(expected, rel=1e-4)

    def test_ordering_and_insufficient_errors(self, grid16):
        g = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        acc = accumulate(NormAccumulator("E0"), (g,))
        with pytest.raises(InsufficientData):
            finalize(acc)
        with pytest.raises(OrderingError):
            accumulate(acc, (g,), None, -1e-3)
        with pytest.raises(OrderingError):
            accumulate(acc, (g,), None, 0.0)

    def test_ehdelta_requires_dudt(self, grid16):
        g = field_from_function(grid16, lambda x, y, z: np.sin(PI * x))
        with pytest.raises(InvalidParameter):
            accumulate(NormAccumulator("EHdelta", delta=1.0), (g,), None)

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameter):
            NormAccumulator("E7")

    def test_monotone_in_horizon_and_homogeneous(self, grid16):
        g = random_band_field(grid16, 17)
        acc = NormAccumulator("E0")
        vals = []
        for i in range(4):
            acc = accumulate(acc, (g,), None, None if i == 0 else 0.5)
            if i >= 1:
                vals.append(finalize(acc))
        assert vals == sorted(vals)
        acc2 = _march(NormAccumulator("E0"), [(3.0 * g,), (3.0 * g,)], 0.5)
        acc1 = _march(NormAccumulator("E0"), [(g,), (g,)], 0.5)
        assert finalize(acc2) == pytest.approx(3 * finalize(acc1))

    def test_embedding_ordering_same_samples(self, grid16):
        """Dropping the vertical-diffusion weight can only shrink the norm."""
        u = [(random_band_field(grid16, 60, EVEN),),
             (random_band_field(grid16, 61, EVEN),)]
        du = [(random_band_field(grid16, 62, EVEN),),
              (random_band_field(grid16, 63, EVEN),)]
        for delta in (0.3, 2.0, 50.0):
            with_d = _march(NormAccumulator("EHdelta", delta=delta), u, 0.1, du)
            without = _march(NormAccumulator("EHdelta", delta=0.0), u, 0.1, du)
            assert finalize(without) <= finalize(with_d) + 1e-12
