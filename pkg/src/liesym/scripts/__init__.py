r'''## Command line tools

Run `liesym --help`; subcommands:
  * gen: sample a solution family into a point-cloud CSV
  * prolong: lift a point cloud into jet space
  * discover: find the symmetries of a point cloud
  * converge: run a benchmark convergence study
'''
