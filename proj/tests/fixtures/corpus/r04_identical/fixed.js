const x  =  1; // same
