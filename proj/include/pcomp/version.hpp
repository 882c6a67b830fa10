#pragma once

#define PCOMP_VERSION "0.1.0"
