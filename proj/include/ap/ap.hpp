#pragma once

#include "ap/bitstring.hpp"
#include "ap/construct.hpp"
#include "ap/encoding.hpp"
#include "ap/enumeration.hpp"
#include "ap/errors.hpp"
#include "ap/io.hpp"
#include "ap/machine.hpp"
#include "ap/measure.hpp"
#include "ap/mixtures.hpp"
#include "ap/rational.hpp"
#include "ap/rebase.hpp"
#include "ap/region.hpp"
#include "ap/schedule.hpp"
#include "ap/semimeasure.hpp"
#include "ap/transform.hpp"
#include "ap/universal.hpp"
