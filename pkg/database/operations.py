"""
Database Operations
Run history and system log records
"""

from datetime import datetime
from sqlalchemy.exc import IntegrityError
import json
import logging

from .models import get_session, ExperimentRun, SystemLog

logger = logging.getLogger(__name__)


class ExperimentRunOperations:
    """CRUD operations for experiment runs"""

    @staticmethod
    def start_run(run_id: str, command: str, target: str = None,
                  parameters: dict = None, db_path=None) -> tuple:
        """Record a run as started"""
        session = get_session(db_path)
        try:
            run = ExperimentRun(
                run_id=run_id,
                command=command,
                target=target,
                parameters=json.dumps(parameters or {}, sort_keys=True, default=str),
                status='running'
            )
            session.add(run)
            session.commit()
            return True, "Run recorded"
        except IntegrityError:
            session.rollback()
            return False, "Run ID already exists"
        except Exception as e:
            session.rollback()
            logger.error(f"Error recording run {run_id}: {str(e)}")
            return False, f"Error: {str(e)}"
        finally:
            session.close()

    @staticmethod
    def finish_run(run_id: str, status: str, exit_code: int, value: str = None,
                   result_path: str = None, message: str = None, db_path=None) -> tuple:
        """Close a run with its outcome"""
        session = get_session(db_path)
        try:
            run = session.query(ExperimentRun).filter(ExperimentRun.run_id == run_id).first()
            if not run:
                return False, "Run not found"
            run.status = status
            run.exit_code = exit_code
            run.value = value
            run.result_path = result_path
            run.message = message
            run.finished_at = datetime.now()
            session.commit()
            return True, "Run updated"
        except Exception as e:
            session.rollback()
            logger.error(f"Error finishing run {run_id}: {str(e)}")
            return False, f"Error: {str(e)}"
        finally:
            session.close()

    @staticmethod
    def get_run(run_id: str, db_path=None) -> ExperimentRun:
        """Get a run by its ID"""
        session = get_session(db_path)
        try:
            return session.query(ExperimentRun).filter(ExperimentRun.run_id == run_id).first()
        finally:
            session.close()

    @staticmethod
    def get_recent_runs(limit: int = 20, command: str = None, db_path=None) -> list:
        """Most recent runs first, optionally for one command"""
        session = get_session(db_path)
        try:
            query = session.query(ExperimentRun)
            if command:
                query = query.filter(ExperimentRun.command == command)
            return query.order_by(ExperimentRun.started_at.desc(),
                                  ExperimentRun.id.desc()).limit(limit).all()
        finally:
            session.close()


class SystemLogOperations:
    """Operations for system logs"""

    @staticmethod
    def log(level: str, module: str, message: str, run_id: str = None, db_path=None):
        """Log a system activity"""
        session = get_session(db_path)
        try:
            entry = SystemLog(
                level=level,
                module=module,
                message=message,
                run_id=run_id
            )
            session.add(entry)
            session.commit()
        except Exception as e:
            session.rollback()
            logger.error(f"Error writing system log: {str(e)}")
        finally:
            session.close()

    @staticmethod
    def get_recent_logs(limit: int = 100, db_path=None) -> list:
        """Get recent system logs"""
        session = get_session(db_path)
        try:
            return session.query(SystemLog).order_by(
                SystemLog.timestamp.desc(), SystemLog.id.desc()
            ).limit(limit).all()
        finally:
            session.close()
