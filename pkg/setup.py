#!/usr/bin/env python
from setuptools import setup, find_packages


def long_desc():
    with open('README.md') as f:
        return f.read()


setup(
    name='tracerules',
    version='1.0',
    description='Session-free monitoring rules mined from distributed '
                'system traces.',
    license='MIT',
    long_description=long_desc(),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['test']),
    package_data={'tracerules.simulation': ['catalog.json']},
    install_requires=['shellish>=5', 'scikit-learn>=0.22'],
    test_suite='test',
    entry_points={
        'console_scripts': [
            'tracerules=tracerules.command:main',
        ]
    },
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Developers',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.11',
        'Topic :: System :: Monitoring',
        'Topic :: System :: Distributed Computing',
    ]
)
