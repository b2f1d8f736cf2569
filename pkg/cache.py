import json
import logging
import threading
from datetime import datetime
from typing import Any, Dict, List, Optional

from sqlalchemy import create_engine, func, select
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from config import API_VERSION, CACHE_URL, MAX_CACHE_ENTRIES
from models import Base, BandEdgePair, PendulumParams, SpectrumCache
from oracle import band_edges, pair_gap
from utils import config_digest

logger = logging.getLogger(__name__)


class SpectrumStore:
    """SQL cache of oracle results keyed by a digest of the parameter record"""

    def __init__(self, url: Optional[str] = CACHE_URL):
        self.url = url or ""
        self._sessions: Optional[sessionmaker] = None
        self._lock = threading.Lock()
        if not self.url:
            return
        try:
            if self.url.startswith("sqlite") and ":memory:" in self.url:
                # one shared connection, otherwise every thread sees an empty database
                engine = create_engine(self.url, poolclass=StaticPool,
                                       connect_args={"check_same_thread": False})
            else:
                engine = create_engine(self.url)
            Base.metadata.create_all(engine)
            self._sessions = sessionmaker(bind=engine, expire_on_commit=False)
            logger.info(f"Spectrum cache enabled at {self.url}")
        except SQLAlchemyError as e:
            logger.error(f"Spectrum cache disabled, could not open {self.url}: {e}")
            self._sessions = None

    @property
    def enabled(self) -> bool:
        return self._sessions is not None

    @staticmethod
    def record(kind: str, p: PendulumParams, **extra: Any) -> Dict[str, Any]:
        record = {"kind": kind, "A": p.A, "B": p.B, "version": API_VERSION}
        record.update(extra)
        return record

    def get(self, record: Dict[str, Any]) -> Optional[Any]:
        """Cached payload for a record, or None"""
        if not self.enabled:
            return None
        params_hash = config_digest(record)
        try:
            with self._lock, self._sessions() as session:
                entry = session.execute(
                    select(SpectrumCache).filter_by(params_hash=params_hash)
                ).scalar_one_or_none()
                if entry is None:
                    return None
                # Update access statistics
                entry.hits = (entry.hits or 0) + 1
                entry.last_accessed = datetime.now()
                session.commit()
                return json.loads(entry.payload)
        except SQLAlchemyError as e:
            logger.error(f"Error reading spectrum cache: {e}")
            return None

    def put(self, record: Dict[str, Any], payload: Any) -> bool:
        if not self.enabled:
            return False
        params_hash = config_digest(record)
        try:
            with self._lock, self._sessions() as session:
                existing = session.execute(
                    select(SpectrumCache).filter_by(params_hash=params_hash)
                ).scalar_one_or_none()
                if existing is not None:
                    existing.payload = json.dumps(payload, sort_keys=True)
                else:
                    session.add(SpectrumCache(
                        params_hash=params_hash,
                        kind=record.get("kind", "unknown"),
                        A=float(record.get("A", 0.0)),
                        B=float(record.get("B", 0.0)),
                        payload=json.dumps(payload, sort_keys=True),
                        hits=0,
                    ))
                session.commit()
            return True
        except SQLAlchemyError as e:
            logger.error(f"Error writing spectrum cache: {e}")
            return False

    def cleanup(self, max_entries: int = MAX_CACHE_ENTRIES) -> int:
        """Drop the least recently used entries beyond max_entries"""
        if not self.enabled:
            return 0
        try:
            with self._lock, self._sessions() as session:
                total = session.execute(select(func.count(SpectrumCache.id))).scalar_one()
                excess = total - max_entries
                if excess <= 0:
                    return 0
                stale = session.execute(
                    select(SpectrumCache).order_by(SpectrumCache.last_accessed, SpectrumCache.id).limit(excess)
                ).scalars().all()
                for entry in stale:
                    session.delete(entry)
                session.commit()
                logger.info(f"Cleaned up {len(stale)} spectrum cache entries")
                return len(stale)
        except SQLAlchemyError as e:
            logger.error(f"Error during cache cleanup: {e}")
            return 0

    def stats(self) -> Dict[str, Any]:
        if not self.enabled:
            return {"enabled": False, "entries": 0, "hits": 0}
        try:
            with self._lock, self._sessions() as session:
                entries = session.execute(select(func.count(SpectrumCache.id))).scalar_one()
                hits = session.execute(select(func.coalesce(func.sum(SpectrumCache.hits), 0))).scalar_one()
                return {"enabled": True, "entries": int(entries), "hits": int(hits)}
        except SQLAlchemyError as e:
            logger.error(f"Error reading cache statistics: {e}")
            return {"enabled": True, "entries": None, "hits": None}


def cached_band_edges(p: PendulumParams, n_max: int, K: Optional[int] = None,
                      store: Optional[SpectrumStore] = None) -> List[BandEdgePair]:
    """band_edges through the store when one is enabled"""
    store = store if store is not None else spectrum_store
    record = SpectrumStore.record("band_edges", p, n_max=n_max, K=K if K is not None else "default")
    payload = store.get(record)
    if payload is not None:
        return [BandEdgePair(n=item["n"], a=item["a"], b=item["b"]) for item in payload]

    edges = band_edges(p, n_max, K=K)
    store.put(record, [{"n": e.n, "a": e.a, "b": e.b} for e in edges])
    return edges


def cached_pair_gap(p: PendulumParams, mu: int, K: Optional[int] = None,
                    store: Optional[SpectrumStore] = None) -> float:
    store = store if store is not None else spectrum_store
    record = SpectrumStore.record("pair_gap", p, mu=mu, K=K if K is not None else "default")
    payload = store.get(record)
    if payload is not None:
        return float(payload)

    gap = pair_gap(p, mu, K=K)
    store.put(record, gap)
    return gap


# Global instance
spectrum_store = SpectrumStore()
