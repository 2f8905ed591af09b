"""
Default Configuration Manifest for treedist

Built-in values for every TREEDIST_* setting. A key set in the process
environment or in .env.treedist takes precedence over the value here.
"""

CONFIG_VALUES = {
    "TREEDIST_ALGORITHM": "divide",  # dynamic | divide | brute
    "TREEDIST_CHAIN_CAP": "1000000",  # brute-force maximal chain limit
    "TREEDIST_WORKERS": "",  # empty: physical CPU count
    "TREEDIST_OUTPUT_FORMAT": "csv",  # csv | tsv | json
    "TREEDIST_LOG_LEVEL": "WARNING",
    "TREEDIST_INCLUDE_LEAVES": "false",
    "TREEDIST_DEFAULT_LENGTH": "",  # empty: missing lengths are an error
    "TREEDIST_OTLP_ENDPOINT": "",  # e.g. localhost:4317
    "TREEDIST_TRACE_CONSOLE": "false",
}
