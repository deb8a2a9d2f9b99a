Date now = new Date();
long stamp = now.getTime();
