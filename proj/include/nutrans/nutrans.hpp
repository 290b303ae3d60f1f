#pragma once

#include <nutrans/blocks.hpp>
#include <nutrans/constants.hpp>
#include <nutrans/construction_l1.hpp>
#include <nutrans/construction_lr.hpp>
#include <nutrans/cutoffs.hpp>
#include <nutrans/ensemble.hpp>
#include <nutrans/geometry.hpp>
#include <nutrans/linalg.hpp>
#include <nutrans/norms.hpp>
#include <nutrans/pairs.hpp>
#include <nutrans/quadrature.hpp>
#include <nutrans/schedule.hpp>
#include <nutrans/weak_form.hpp>
