import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bowenseries.estimators import ConstantSlopeConjugacy


@pytest.fixture(scope="module")
def fitted():
    return ConstantSlopeConjugacy(genus=2, epsilon=1e-4).fit()


def test_params_and_clone():
    est = ConstantSlopeConjugacy(genus=3, spec="all-Q", epsilon=1e-3)
    assert est.get_params()["genus"] == 3
    c = clone(est)
    assert c.get_params() == est.get_params() and not hasattr(c, "table_")


def test_not_fitted():
    with pytest.raises(NotFittedError):
        ConstantSlopeConjugacy().transform([0.1])


def test_fitted_attributes(fitted):
    assert fitted.slope_ == pytest.approx(5 + 2 * math.sqrt(6))
    assert fitted.entropy_ == pytest.approx(math.log(fitted.slope_))
    assert fitted.resolution_ <= 1e-4


def test_shapes_are_preserved(fitted):
    x = np.linspace(-3, 3, 7)
    assert fitted.transform(x).shape == (7,)
    assert fitted.transform(x[:, None]).shape == (7, 1)
    back = fitted.inverse_transform(fitted.transform(x))
    assert np.max(np.abs(back - x)) < 1e-9
    with pytest.raises(ValueError):
        fitted.transform(np.zeros((3, 2)))


def test_bad_epsilon():
    with pytest.raises(ValueError):
        ConstantSlopeConjugacy(epsilon=0).fit()
