"""
URL configuration for the calibration harness.

Only the admin is exposed; it is used to browse recorded experiment runs.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
