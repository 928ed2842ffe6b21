import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from geoperiods.bessel import (
    KBesselTable,
    kbessel,
    kbessel_series,
    kbessel_tilde,
    table_for,
)

ORDERS = [0.5, 1.0, 9.533695263330358]


@pytest.fixture(scope="module")
def tables():
    return {t: table_for(t) for t in ORDERS}


class TestReferenceValues:
    def test_against_series_oracle(self):
        # two independent routes to K_{it}: mpmath directly vs the ascending
        # series of I_{it} combined through the reflection identity
        for t in (0.5, 1.0, 9.5337):
            for x in (1e-4, 0.01, 0.5, 3.0, 11.0, 30.0):
                a = kbessel(t, x)
                b = kbessel_series(t, x)
                assert a == pytest.approx(b, rel=1e-10, abs=1e-280)

    @pytest.mark.slow
    def test_series_oracle_dense(self):
        t = 1.0
        xs = np.exp(np.linspace(math.log(1e-4), math.log(60.0), 200))
        for x in xs:
            a = kbessel(t, float(x))
            b = kbessel_series(t, float(x))
            assert a == pytest.approx(b, rel=1e-10, abs=1e-280)

    def test_positive_argument_required(self):
        with pytest.raises(ValueError):
            kbessel(1.0, 0.0)
        with pytest.raises(ValueError):
            kbessel_series(1.0, -1.0)

    def test_tilde_consistency(self):
        for x in (0.5, 5.0, 40.0):
            assert kbessel_tilde(1.0, x) == pytest.approx(
                math.exp(x) * kbessel(1.0, x), rel=1e-12)


class TestTable:
    def test_spline_matches_direct(self, tables):
        rng = np.random.default_rng(11)
        for t, tbl in tables.items():
            xs = np.exp(rng.uniform(math.log(2e-4), math.log(59.0), 40))
            direct = np.array([kbessel(t, float(x)) for x in xs])
            scale = math.exp(math.pi * t / 2)  # K_{it} amplitude ~ e^{-pi t/2}
            err = np.max(np.abs(tbl.k(xs) - direct)) * scale
            assert err < 1e-9

    def test_asymptotic_region(self, tables):
        tbl = tables[1.0]
        for x in (70.0, 100.0):
            assert tbl.k(x) == pytest.approx(kbessel(1.0, x), rel=1e-4)

    def test_phi_against_quadrature(self, tables):
        for t in (1.0, 9.533695263330358):
            tbl = tables[t]
            for w in (0.5, 3.0, 12.0):
                ref, est = quad(lambda u: kbessel(t, u) / math.sqrt(u),
                                w, 80.0, limit=300, epsabs=1e-13)
                scale = math.exp(math.pi * t / 2)
                assert abs(tbl.phi(w) - ref) * scale < 1e-8

    def test_phi_decreasing_tail(self, tables):
        tbl = tables[1.0]
        ws = np.array([1.0, 2.0, 5.0, 20.0, 70.0])
        vals = tbl.phi(ws)
        assert np.all(np.diff(vals) < 0)

    def test_below_range_rejected(self, tables):
        with pytest.raises(ValueError):
            tables[1.0].k(1e-6)
        with pytest.raises(ValueError):
            tables[1.0].phi(1e-6)

    def test_save_load_roundtrip(self, tmp_path, tables):
        tbl = tables[0.5]
        path = str(tmp_path / "tbl.npz")
        tbl.save(path)
        back = KBesselTable.load(path)
        xs = np.array([0.01, 1.0, 30.0])
        assert np.allclose(back.k(xs), tbl.k(xs), rtol=0, atol=1e-15)
        assert np.allclose(back.phi(xs), tbl.phi(xs), rtol=0, atol=1e-15)

    def test_cache_dir_used(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GEOLAB_CACHE", str(tmp_path))
        t = 0.25
        tbl = KBesselTable.for_order(t)
        name = KBesselTable._cache_name(t)
        assert (tmp_path / name).exists()
        again = KBesselTable.for_order(t)
        assert np.array_equal(again.tilde_values, tbl.tilde_values)

    def test_registry_memoizes(self):
        assert table_for(1.0) is table_for(1.0)


class TestBundledTables:
    def test_bundled_orders_load_without_build(self):
        import os

        from geoperiods.bessel import DATA_DIR

        for t in (1.0, 9.533695263330358):
            name = KBesselTable._cache_name(t)
            assert os.path.exists(os.path.join(DATA_DIR, name))
