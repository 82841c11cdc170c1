"""
Pass Rate Optimization Package
Segment students by GPA, profile instructors from historical records and
solve the instructor/student assignment integer programs of multi-section courses.
"""

__version__ = "1.0.0"
