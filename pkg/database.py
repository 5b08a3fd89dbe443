import os
from datetime import datetime

from sqlalchemy import Column, DateTime, Float, Integer, String, Text, create_engine
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import sessionmaker

# SQLite database setup; DEFECT_FORGE_DB points elsewhere
SQLALCHEMY_DATABASE_URL = os.environ.get("DEFECT_FORGE_DB", "sqlite:///./compile_runs.db")
connect_args = {"check_same_thread": False} if SQLALCHEMY_DATABASE_URL.startswith("sqlite") else {}
engine = create_engine(SQLALCHEMY_DATABASE_URL, connect_args=connect_args)
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


class CompileRun(Base):
    """One compile request and the artifacts it produced"""

    __tablename__ = "compile_runs"

    id = Column(Integer, primary_key=True, index=True)
    name = Column(String, index=True)
    created_at = Column(DateTime, default=datetime.utcnow)
    stop_after = Column(String)
    seed = Column(Integer, default=0)
    reliability_target = Column(Float)
    t_count = Column(Integer, default=0)
    qubit_count = Column(Integer, default=0)
    wire_count = Column(Integer, default=0)
    bbox_volume = Column(Integer, default=0)
    occupancy = Column(Float, default=0.0)
    source = Column(Text)  # circuit text as submitted
    report = Column(Text)  # <name>.report.json
    artifacts = Column(Text)  # JSON object: filename -> content


def create_tables():
    """Create all database tables"""
    Base.metadata.create_all(bind=engine)


def get_db():
    """Dependency to get database session"""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
