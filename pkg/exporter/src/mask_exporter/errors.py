"""Exporter exception hierarchy."""


class ExportError(Exception):
    """Any failure that should abort an export with a diagnostic."""


class ModelUnavailableError(ExportError):
    """The segmentation model or its pretrained checkpoint cannot be loaded."""
