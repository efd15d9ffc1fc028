"""Small protocols used by the simulator tests."""

from fdnet.protocol import BROADCAST, Process, ProtocolSpec


class Send(Process):
    """Node ``src`` sends ``payload`` to ``dest`` once; receivers record it."""

    def init(self):
        self.got = []
        p = self.params
        if self.node != p["src"]:
            return []
        return [self.send(p["dest"], p["payload"])]

    def on_deliver(self, env):
        self.got.append(env)
        return []

    def result(self):
        return [e.payload for e in self.got]


class EveryoneSends(Process):
    """Each node unicasts its id to its lowest neighbour and broadcasts once."""

    def init(self):
        self.got = []
        return [self.send(self.neighbors[0], format(self.node, "b")), self.send(BROADCAST, "1")]

    def on_deliver(self, env):
        self.got.append(env)
        return []

    def result(self):
        return sorted((e.source, e.dest, e.payload) for e in self.got)


def send(src, dest, payload):
    return ProtocolSpec("send", Send, (("dest", dest), ("payload", payload), ("src", src)))


SILENT = ProtocolSpec("silent", Process)
EVERYONE = ProtocolSpec("everyone", EveryoneSends)
