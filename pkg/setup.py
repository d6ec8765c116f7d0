from setuptools import setup, find_packages

setup(
    name="convreg",
    version='0.1.0',
    description=('Convex variational regularization with the discrepancy '
                 'principle, and numerical checks of its convergence rates.'),
    author=["Balthazar Rouberol"],
    author_email=['balthazar@mapado.com'],
    packages=find_packages(),
    include_package_data=True,
    package_data={'convreg': ['data/*.json']},
    install_requires=[
        # public packages
        'numpy>=1.17',
        'scipy',
    ],
    entry_points={
        'console_scripts': ['convreg = convreg.cli:main'],
    },
)
