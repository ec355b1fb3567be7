#pragma once

#include "cascade/arith.hpp"
#include "cascade/classify.hpp"
#include "cascade/disk.hpp"
#include "cascade/dynamics.hpp"
#include "cascade/ellis.hpp"
#include "cascade/equicont.hpp"
#include "cascade/error.hpp"
#include "cascade/oracle.hpp"
#include "cascade/presentation.hpp"
#include "cascade/residue.hpp"
