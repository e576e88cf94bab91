import codecs
import os

from setuptools import find_packages, setup


__version__ = '1.0.0'


def read(*parts):
    filename = os.path.join(os.path.dirname(__file__), *parts)
    with codecs.open(filename, encoding='utf-8') as fp:
        return fp.read()


install_requirements = [
    'requests>=2.23,<3.0',
    'numpy>=1.21,<3.0',
    'scipy>=1.7,<2.0',
    'statsmodels>=0.13,<1.0',
    'pandas>=1.5,<3.0',
    'pulp>=2.6,<3.0',
]

test_requirements = [
    'pytest>=7.0,<9.0',
    'pytest-cov>=3.0,<6.0',
    'pytest-mock>=3.6,<4.0',
    'flake8>=4.0',
    'isort>=5.0',
]

docs_requirements = [
    'pydoc-markdown==2.0.5',
]

setup(
    name='aerocell',
    version=__version__,
    description=(
        "Aerocell plans drone base station fleets: placement, "
        "demand forecasting and transfer between planning rounds."
    ),
    long_description=read('README.md'),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=['tests', 'tests.*']),
    include_package_data=True,
    install_requires=install_requirements,
    extras_require={
        'tests': test_requirements,
        'docs': docs_requirements,
    },
    entry_points={
        'console_scripts': [
            'aerocell=aerocell.cli:main',
        ],
    },
    python_requires='>=3.8',
    license='MIT',
    keywords=[
        'drone',
        'uav',
        'base station',
        'placement',
        'coverage',
        'holt-winters',
        'forecast',
        'assignment',
    ],
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering',
    ],
)
