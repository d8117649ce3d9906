import numpy as np
from scipy import stats

from checkerboard import _rng


class TestCounterGenerator:
    def test_pure_function(self):
        a = _rng.uniforms(7, np.arange(10), 3, 2)
        b = _rng.uniforms(7, np.arange(10), 3, 2)
        assert np.array_equal(a, b)

    def test_broadcasting(self):
        u = _rng.uniforms(1, np.arange(4)[:, None], 5, np.arange(3)[None, :])
        assert u.shape == (4, 3)
        assert u[2, 1] == _rng.uniforms(1, 2, 5, 1)

    def test_keys_distinct(self):
        keys = {int(_rng.vertex_key(n, k)) for n in range(-20, 20) for k in range(-20, 20)}
        assert len(keys) == 40 * 40

    def test_uniform_and_decorrelated(self):
        u = _rng.uniforms(3, np.arange(200_000), 4, 0)
        assert stats.kstest(u, "uniform").pvalue > 1e-3
        assert ((0.0 <= u) & (u < 1.0)).all()
        v = _rng.uniforms(3, np.arange(200_000), 4, 1)
        assert abs(np.corrcoef(u, v)[0, 1]) < 0.01
        w = _rng.uniforms(4, np.arange(200_000), 4, 0)
        assert abs(np.corrcoef(u, w)[0, 1]) < 0.01
