"""
PyInstaller compatible resource path resolution utilities
"""
import sys
import os
from pathlib import Path

try:
    from config.defaults import APP_DIR_NAME
except ImportError:
    from ..config.defaults import APP_DIR_NAME


def resource_path(relative_path: str) -> Path:
    """
    Returns correct resource path for both PyInstaller --onefile execution
    and normal script execution (bundled golden tables live under data/)

    Args:
        relative_path: Relative path from project root

    Returns:
        Path: Absolute path
    """
    if hasattr(sys, '_MEIPASS'):
        # PyInstaller execution
        base_path = Path(sys._MEIPASS)
    else:
        # Normal script execution
        base_path = Path(__file__).parent.parent

    return base_path / relative_path


def get_app_data_dir() -> Path:
    """
    Get application data directory
    Windows: %APPDATA%/RandomLeapAnalyzer
    Others: $RANDOM_LEAP_HOME if set, else ~/.config/RandomLeapAnalyzer

    Returns:
        Path: Application data directory
    """
    override = os.environ.get('RANDOM_LEAP_HOME')
    if override:
        app_dir = Path(override)
    else:
        if sys.platform == 'win32':
            base = Path(os.environ.get('APPDATA', ''))
        else:
            base = Path.home() / '.config'
        app_dir = base / APP_DIR_NAME

    app_dir.mkdir(parents=True, exist_ok=True)
    return app_dir
