#pragma once
#include "doctest.h"

// Purely relative comparison; doctest's default absolute scale of 1 would
// make checks on 1e-40-sized quantities vacuous.
inline doctest::Approx rel(double value, double epsilon = 1e-12)
{
    return doctest::Approx(value).epsilon(epsilon).scale(0.0);
}
