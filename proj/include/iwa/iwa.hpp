#pragma once

#include "core.hpp"
#include "padic.hpp"
#include "series.hpp"
#include "iwasawa.hpp"
#include "distribution.hpp"
#include "pollack.hpp"
#include "dieudonne.hpp"
#include "signed.hpp"
#include "lfunctions.hpp"
#include "eulersys.hpp"
