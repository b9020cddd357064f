from shared.models.architecture import GlobalPoolRecord, SelectOrdersRecord
from shared.utils.errors import OrderMismatchError

from .base import Channels, Layer, register_layer
from .features import global_pool, select_orders


@register_layer
class SelectOrders(Layer):
    """Drops every order not listed."""

    kind = "select_orders"

    def __init__(self, name: str, orders):
        super().__init__(name)
        self.orders = sorted(set(orders))

    @classmethod
    def from_record(cls, record: SelectOrdersRecord, name: str) -> "SelectOrders":
        return cls(name, record.orders)

    def to_record(self) -> SelectOrdersRecord:
        return SelectOrdersRecord(orders=self.orders)

    def output_channels(self, channels: Channels) -> Channels:
        missing = [l for l in self.orders if l not in channels]
        if missing:
            raise OrderMismatchError(f"{self.name}: input has no order(s) {missing}")
        return {l: channels[l] for l in self.orders}

    def forward(self, params, geometry, features):
        return select_orders(features, self.orders)


@register_layer
class GlobalPool(Layer):
    """Sum over points; later layers see a single point."""

    kind = "global_pool"

    @classmethod
    def from_record(cls, record: GlobalPoolRecord, name: str) -> "GlobalPool":
        return cls(name)

    def to_record(self) -> GlobalPoolRecord:
        return GlobalPoolRecord()

    def output_channels(self, channels: Channels) -> Channels:
        return dict(channels)

    def forward(self, params, geometry, features):
        return global_pool(features)
