from cache import SpectrumStore, cached_band_edges, cached_pair_gap
from models import PendulumParams
from oracle import band_edges


def test_disabled_store_is_a_no_op():
    store = SpectrumStore("")
    record = SpectrumStore.record("pair_gap", PendulumParams(A=0.0, B=36.0), mu=0)
    assert not store.enabled
    assert store.get(record) is None
    assert store.put(record, 1.0) is False
    assert store.cleanup() == 0
    assert store.stats() == {"enabled": False, "entries": 0, "hits": 0}


def test_unreachable_database_disables_the_store():
    assert not SpectrumStore("nosuchdialect://localhost/cache").enabled


def test_put_and_get(memory_store):
    record = SpectrumStore.record("pair_gap", PendulumParams(A=0.0, B=36.0), mu=0)
    assert memory_store.get(record) is None
    assert memory_store.put(record, {"gap": 0.5})
    assert memory_store.get(record) == {"gap": 0.5}
    assert memory_store.put(record, {"gap": 0.25})
    assert memory_store.get(record) == {"gap": 0.25}
    assert memory_store.stats() == {"enabled": True, "entries": 1, "hits": 2}


def test_cleanup_drops_the_oldest_entries(memory_store):
    records = [SpectrumStore.record("pair_gap", PendulumParams(A=0.0, B=B), mu=0) for B in (10.0, 20.0, 30.0)]
    for record in records:
        memory_store.put(record, record["B"])
    assert memory_store.cleanup(max_entries=1) == 2
    assert memory_store.get(records[0]) is None
    assert memory_store.get(records[2]) == 30.0
    assert memory_store.cleanup(max_entries=1) == 0


def test_cached_band_edges_round_trip(memory_store):
    p = PendulumParams(A=1.0, B=20.0)
    first = cached_band_edges(p, 2, store=memory_store)
    second = cached_band_edges(p, 2, store=memory_store)
    assert first == second == band_edges(p, 2)
    assert memory_store.stats()["hits"] == 1


def test_cached_pair_gap(memory_store):
    p = PendulumParams(A=0.0, B=36.0)
    gap = cached_pair_gap(p, 0, store=memory_store)
    assert cached_pair_gap(p, 0, store=memory_store) == gap
    assert memory_store.stats() == {"enabled": True, "entries": 1, "hits": 1}
