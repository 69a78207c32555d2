from setuptools import setup, find_packages

setup(
    name='discrete_convexity_testers',
    version='1.0.0',
    description='Property testers for convexity of functions on discrete grids, with lower-bound instance generators',
    author='Your Name',
    packages=find_packages(include=['convexity_testing', 'convexity_testing.*']),
    py_modules=['run'],
    install_requires=[
        'pandas==2.1.3',
        'numpy==1.25.2',
        'scipy==1.11.4',
        'python-dotenv==1.0.0',
        'pydantic==2.5.0',
    ],
    extras_require={
        'dev': [
            'pytest==7.4.3',
            'hypothesis==6.92.1',
            'black==23.11.0',
            'flake8==6.1.0',
        ]
    },
    python_requires='>=3.9',
    entry_points={
        'console_scripts': [
            'convexity-lab=run:main'
        ]
    },
    classifiers=[
        'Programming Language :: Python :: 3.9',
        'Operating System :: OS Independent',
    ],
)
