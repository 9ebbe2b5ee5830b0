"""Domain logic: network model, association statistics, coverage closed forms and simulation."""
