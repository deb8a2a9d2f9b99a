@Entity
@Table(name = "orders")
public class Order {
    private Long total;
}
