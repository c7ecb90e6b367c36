"""A setuptools based setup module for ffsheets."""
# Always prefer setuptools over distutils
from io import open
from os import path

from setuptools import setup, find_packages

here = path.abspath(path.dirname(__file__))
# The long description is the README
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='ffsheets',
    version='0.1.0',
    description="Scattering matrices and resonances of Friedrichs-Faddeev models on the physical "
                "and unphysical sheets.",
    long_description=long_description,
    long_description_content_type='text/markdown',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering :: Physics'
    ],
    packages=find_packages(exclude=[
        '**/.pytest_cache/**',
    ]),
    python_requires='>=3.9',
    install_requires=[
        'Click',
        'networkx',
        'numpy',
        'scipy',
        'pandas (>=1.5)',
        'tabulate',
        'tqdm'
    ],
    include_package_data=True,
    package_data={'ffsheets': ['res/configs/*.json']},
    entry_points='''
    [console_scripts]
    ffsheets=ffsheets.cli:cli
    '''
)
