# Command line subcommands