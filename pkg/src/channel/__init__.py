"""Link budget, radio channel, receiver frontend and sensitivity models."""
