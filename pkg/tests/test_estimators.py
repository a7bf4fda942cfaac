import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from projquant._rational import QQ
from projquant.cartancurved import ProjConnection
from projquant.estimators import CurvedQuantizer, FlatQuantizer, parse_rep
from projquant.quantflat import CriticalPairError, quantize_flat
from projquant.repspace import RepSpec, density
from projquant.suites import random_connection, random_symbol


def test_parse_rep():
    assert parse_rep("density:1/3") == density(QQ(1, 3))
    assert parse_rep("sym:2:1/2") == RepSpec("sym", 2, QQ(1, 2))
    assert parse_rep("ext:1") == RepSpec("ext", 1, 0)
    assert parse_rep(None) == density(0)
    for bad in ["tensor:1", "density:1/0", "sym:x:0", "density:1:2"]:
        with pytest.raises(ValueError):
            parse_rep(bad)


def test_params_and_clone():
    q = FlatQuantizer(m=2, rep1="density:2", rep2="density:-3/7", k_max=2)
    params = q.get_params()
    assert params == {"m": 2, "rep1": "density:2", "rep2": "density:-3/7", "delta": None, "k_max": 2}
    q2 = clone(q).set_params(k_max=1)
    assert q2.k_max == 1 and q.k_max == 2


def test_flat_round_trip(rng):
    q = FlatQuantizer(m=2, rep1="density:2", delta="1/7", k_max=3).fit()
    with pytest.raises(NotFittedError):
        FlatQuantizer().transform([])
    Ts = [random_symbol(2, q.rep1_, q.rep2_, k, rng) for k in range(4)]
    Ds = q.transform(Ts)
    assert Ds == [quantize_flat(T) for T in Ts]
    mixed = Ts[3] + Ts[1]
    assert q.inverse_transform(q.transform(mixed)) == mixed
    assert q.inverse_transform(Ds) == Ts
    assert set(q.tables()) == {0, 1, 2, 3}


def test_flat_rejects_critical_and_mismatched(rng):
    with pytest.raises(CriticalPairError):
        FlatQuantizer(m=2, rep1="density:2", delta=1, k_max=1).fit()
    q = FlatQuantizer(m=2, rep1="density:2", delta="1/7", k_max=1).fit()
    with pytest.raises(ValueError):
        q.transform(random_symbol(2, q.rep1_, q.rep2_, 2, rng))
    with pytest.raises(ValueError):
        q.transform(random_symbol(2, density(1), q.rep2_, 1, rng))
    with pytest.raises(ValueError):
        FlatQuantizer(m=1).fit()


def test_curved_round_trip(rng):
    c = random_connection(2, rng)
    q = CurvedQuantizer(connection=c, rep1="density:2", rep2="density:-3/7", k_max=2).fit()
    assert q.cartan_ is not None and q.m == 2
    T = random_symbol(2, q.rep1_, q.rep2_, 2, rng) + random_symbol(2, q.rep1_, q.rep2_, 1, rng)
    D = q.transform(T)
    assert q.inverse_transform(D) == T
    flat = CurvedQuantizer(connection=ProjConnection.flat(2), rep1="density:2", rep2="density:-3/7").fit()
    assert flat.transform(T) == quantize_flat(T)
    with pytest.raises(TypeError):
        CurvedQuantizer(connection="nope").fit()
