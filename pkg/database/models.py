"""
Database Models
Run history for tempoflow experiments
"""

from sqlalchemy import create_engine, Column, Integer, String, DateTime, Text
from sqlalchemy.orm import declarative_base, sessionmaker
from datetime import datetime
from pathlib import Path
import os
import sys

sys.path.append(str(Path(__file__).parent.parent))
from config.settings import DATABASE_PATH

Base = declarative_base()

_engines = {}


class ExperimentRun(Base):
    """One CLI invocation"""
    __tablename__ = 'experiment_runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String(50), unique=True, nullable=False, index=True)
    command = Column(String(50), nullable=False, index=True)
    target = Column(String(255), nullable=True)  # instance path or family name
    parameters = Column(Text, nullable=True)  # JSON
    status = Column(String(20), default='running')
    exit_code = Column(Integer, nullable=True)
    value = Column(String(100), nullable=True)  # headline result as "p/q"
    result_path = Column(String(255), nullable=True)
    message = Column(Text, nullable=True)
    started_at = Column(DateTime, default=datetime.now)
    finished_at = Column(DateTime, nullable=True)

    def __repr__(self):
        return f"<ExperimentRun(run_id={self.run_id}, command={self.command}, status={self.status})>"


class SystemLog(Base):
    """System activity logs"""
    __tablename__ = 'system_logs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    timestamp = Column(DateTime, default=datetime.now)
    level = Column(String(20), default='INFO')
    module = Column(String(100), nullable=True)
    message = Column(Text, nullable=True)
    run_id = Column(String(50), nullable=True)


def database_path(path=None) -> Path:
    """Explicit path, then TEMPOFLOW_DB, then the configured default"""
    if path is not None:
        return Path(path)
    return Path(os.environ.get("TEMPOFLOW_DB", DATABASE_PATH))


def init_database(path=None):
    """Initialize the database and create all tables"""
    db_path = database_path(path)
    key = str(db_path.resolve())
    if key not in _engines:
        db_path.parent.mkdir(parents=True, exist_ok=True)
        engine = create_engine(f'sqlite:///{db_path}', echo=False)
        Base.metadata.create_all(engine)
        _engines[key] = engine
    return _engines[key]


def get_session(path=None):
    """Get a database session"""
    engine = init_database(path)
    Session = sessionmaker(bind=engine, expire_on_commit=False)
    return Session()
