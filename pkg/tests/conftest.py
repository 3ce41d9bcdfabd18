import hypothesis

# Derandomized so the suite is byte-stable run to run.
hypothesis.settings.register_profile(
    "toolbox", derandomize=True, deadline=None, max_examples=60
)
hypothesis.settings.load_profile("toolbox")
