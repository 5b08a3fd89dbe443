import os
from pathlib import Path

# route the run-history database to memory before the routers create tables
os.environ.setdefault("DEFECT_FORGE_DB", "sqlite://")

import numpy as np
import pytest

from forge.parser import parse_circuit

DB_DIR = Path(__file__).resolve().parent.parent / "db"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def db_dir():
    return DB_DIR


@pytest.fixture
def load_circuit():
    def _load(name):
        return parse_circuit((DB_DIR / name).read_text(encoding="utf-8"))

    return _load


@pytest.fixture
def api_client():
    from fastapi.testclient import TestClient
    from sqlalchemy import create_engine
    from sqlalchemy.orm import sessionmaker
    from sqlalchemy.pool import StaticPool

    from database import Base, get_db
    from main import app

    engine = create_engine(
        "sqlite://", connect_args={"check_same_thread": False}, poolclass=StaticPool
    )
    TestingSession = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    Base.metadata.create_all(bind=engine)

    def override_get_db():
        db = TestingSession()
        try:
            yield db
        finally:
            db.close()

    app.dependency_overrides[get_db] = override_get_db
    with TestClient(app) as client:
        yield client
    app.dependency_overrides.clear()
