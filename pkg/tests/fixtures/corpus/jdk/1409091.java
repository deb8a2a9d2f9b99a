BigDecimal price = new BigDecimal("12.50");
BigDecimal qty = new BigDecimal("3");
BigDecimal total = price.multiply(qty);
