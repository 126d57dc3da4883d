"""SAA tail bounds: sample average approximation experiments for risk-neutral elliptic control."""
