"""Utility package"""
from .system import resource_path, get_app_data_dir

__all__ = ['resource_path', 'get_app_data_dir']
