"""
Celery worker entry point.

    celery -A app.tasks.worker worker --loglevel=info
"""

from app import create_app
from app.tasks import celery, celery_init_app

application = create_app()
celery_init_app(application)

__all__ = ['celery']
