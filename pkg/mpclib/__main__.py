#!/usr/bin/env python
import sys

from mpclib import __version__
import mpclib.config
import mpclib.harness
import mpclib.logger
from mpclib.constants import EXIT_AUDIT_FAILED
from mpclib.constants import EXIT_OK
from mpclib.constants import EXIT_USAGE
from mpclib.constants import EXIT_VERIFICATION_FAILED
from mpclib.errors import ConfigurationError
from mpclib.errors import FinishOffError
from mpclib.errors import GraphFormatError
from mpclib.errors import GraphParameterError
from mpclib.errors import MpcLibError
from mpclib.errors import ResourceError
from mpclib.errors import UsageError

COMMANDS = {
    "gen": mpclib.harness.cmd_gen,
    "run": mpclib.harness.cmd_run,
    "bench": mpclib.harness.cmd_bench,
}


def exit_code_for(err: MpcLibError) -> int:
    if isinstance(err, (UsageError, GraphFormatError, GraphParameterError, ConfigurationError)):
        return EXIT_USAGE
    if isinstance(err, (ResourceError, FinishOffError)):
        return EXIT_AUDIT_FAILED
    return EXIT_VERIFICATION_FAILED


def run_command(argv=None) -> int:
    args = mpclib.config.parse_cli(argv)
    if args.version:
        print(f"mpcsim v{__version__}")
        if args.command is None:
            return EXIT_OK
    if args.log_level:
        mpclib.logger.log.setLevel(args.log_level)

    try:
        config = mpclib.config.get_configuration(args)
        mpclib.logger.log.setLevel(config["log_level"])
        return COMMANDS[args.command](config)
    except MpcLibError as err:
        mpclib.logger.log.error(f"{type(err).__name__}: {err}")
        return exit_code_for(err)


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
