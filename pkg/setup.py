from setuptools import setup, find_packages

setup(
    name='thermosteer',
    version='1.0.0',
    license='GPL-3.0-or-later',
    packages=find_packages(where='src'),
    package_dir={'': 'src'},
    include_package_data=True,
    python_requires='>=3.8',
    entry_points={
        'console_scripts': [
            'thermosteer=thermosteer.cli:main',
        ],
    },
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'cvxpy',
    ],
    extras_require={
        'test': ['pytest'],
    },
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Physics',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Development Status :: 4 - Beta'
    ],
    keywords=[
        'quantum thermodynamics', 'thermal machine', 'steering',
        'teleportation', 'Bell nonlocality', 'Lindblad'
    ],
)
