"""HTTP API: dataset uploads, asynchronous analysis jobs, histogram data."""
