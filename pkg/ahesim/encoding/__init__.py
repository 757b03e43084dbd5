from .fixedpoint import (ScaleConfig, BudgetCheck, encode, encode_weight,
                         encode_vector, decode, decode_product,
                         overflow_budget, require_budget)
