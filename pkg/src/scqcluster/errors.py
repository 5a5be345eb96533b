"""Exception hierarchy shared by all modules."""


class ScqClusterError(Exception):
    pass


class NoPath(ScqClusterError):
    pass


class BallTooLarge(ScqClusterError):
    pass


class InvalidPolicy(ScqClusterError):
    pass


class TooLarge(ScqClusterError):
    """The brute-force path enumeration exceeded its expansion budget."""


class Disconnected(ScqClusterError):
    pass


class EmptyCluster(ScqClusterError):
    pass


class NotAPartition(ScqClusterError):
    pass


class GuessUnderflow(ScqClusterError):
    pass


class RejectionExhausted(ScqClusterError):
    pass


class InstanceFormatError(ScqClusterError):
    pass


class RecoveryError(ScqClusterError):
    """Recovery produced something inconsistent with a convex clustering."""

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = sorted(nodes)


class PartitionError(RecoveryError):
    pass


class ContractViolation(RecoveryError):
    pass
