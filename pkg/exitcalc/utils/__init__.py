# Serialization, reports and output helpers