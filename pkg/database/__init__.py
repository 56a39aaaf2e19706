"""Database package"""
from .models import init_database, get_session, database_path, ExperimentRun, SystemLog
from .operations import ExperimentRunOperations, SystemLogOperations
