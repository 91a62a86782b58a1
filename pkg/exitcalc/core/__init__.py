# Combinatorial and algebraic core of the calculator