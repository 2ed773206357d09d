# Process exit statuses shared by the subcommands.
EXIT_OK = 0
EXIT_VIOLATION = 1     # check: an identity or oracle exceeded its tolerance
EXIT_SOLVER = 2        # no extremal survived the solver
EXIT_INTERNAL = 70     # unexpected failure (EX_SOFTWARE)
EXIT_USAGE = 64        # bad arguments or configuration (EX_USAGE)
