#pragma once

#include "siminfer/csv.hpp"
#include "siminfer/engine.hpp"
#include "siminfer/errors.hpp"
#include "siminfer/inference.hpp"
#include "siminfer/manifest.hpp"
#include "siminfer/moments.hpp"
#include "siminfer/random.hpp"
#include "siminfer/report.hpp"
#include "siminfer/sample.hpp"
#include "siminfer/theory.hpp"
