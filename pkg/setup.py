import re

from setuptools import setup, find_packages

with open('trajcheck/__init__.py') as f:
    VERSION = re.search(r"^VERSION = '([^']+)'", f.read(), re.M).group(1)

install_requires = [
    'pyyaml',
    'Jinja2',
    'click<8',
    'numpy>=1.17',
    'scipy>=1.4',
]

extras_require = {
    'testing': [
        'pytest',
        'pytest-xdist',
        'coverage',
        'flake8',
        'tox',
    ]
}

setup(
    name='trajcheck',
    packages=find_packages(),
    version=VERSION,
    description='Detect whether a measure on the unit square is supported '
                'on a trajectory, from its moments',
    long_description=open('README.rst').read(),
    license='MPL2',
    python_requires='>=3.8',
    install_requires=install_requires,
    extras_require=extras_require,
    scripts=['bin/trajcheck'],
    keywords='moments legendre orthogonal-polynomials measure trajectory')
