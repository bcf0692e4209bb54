from .core import Packet, QueueCore, Rejected, backlog, dequeue, enqueue
